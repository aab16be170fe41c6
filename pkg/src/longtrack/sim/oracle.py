"""Oracle segmentation backend whose accuracy tracks memory coverage.

Prediction quality on a tracked frame is

    q = clip(base + gain * max_i cos(memory_i.embedding, viewpoint_t), 0, 1)

so a memory bank whose embeddings cover the viewpoints actually seen
scores higher. During detection (no memory context) quality follows the
scenario's detection curve plus its per-frame noise draw.

The emitted mask keeps the ceil(q * area) deepest ground-truth pixels,
giving a realized IoU of kept/area; the reported IoU score is that
realized overlap plus the frame's score-noise draw, clamped to [0, 1].
The emitted embedding is the true viewpoint rotated away by an angle
proportional to (1 - realized IoU): sloppy masks poison the memory they
seed, which is how initialization quality propagates. Absent frames emit
an empty mask, a decisively negative occlusion logit, a low IoU score,
and a pure-noise embedding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import FrameIndex, ScoreReport, cosine_similarity
from ..kernels.block import FeatureWindow
from ..memory import MemoryEntry
from .scene import FramePayload


class EmptyMemoryContextError(ValueError):
    """Tracking-mode segmentation requires at least one memory entry."""


@dataclass(frozen=True)
class FidelityModel:
    """Harness parameters for the oracle; none of these are claims."""

    base: float = 0.55
    gain: float = 0.4
    occ_scale: float = 8.0
    corruption_angle: float = 2.0   # embedding error (radians) at quality 0
    absent_iou: float = 0.08


class OracleBackend:
    """Deterministic stand-in for a real segmentation model."""

    def __init__(self, fidelity: FidelityModel, mask_shape: tuple[int, int],
                 embedding_dim: int = 8):
        self.fidelity = fidelity
        self.mask_shape = (int(mask_shape[0]), int(mask_shape[1]))
        self.embedding_dim = int(embedding_dim)

    def encode(self, frame: FrameIndex, payload: FramePayload) -> np.ndarray:
        return np.asarray(payload.viewpoint, dtype=np.float64).reshape(1, 1, -1)

    def segment(self, frame: FrameIndex, payload: FramePayload,
                text_embedding: np.ndarray,
                memory_context: list[MemoryEntry] | None,
                features: FeatureWindow) -> ScoreReport:
        fid = self.fidelity
        if memory_context is None:
            quality = float(np.clip(
                payload.detection_quality + payload.quality_noise, 0.0, 1.0))
        else:
            if not memory_context:
                raise EmptyMemoryContextError(
                    "tracking requires a non-empty memory context")
            best = max(cosine_similarity(e.embedding, payload.viewpoint)
                       for e in memory_context)
            quality = float(np.clip(fid.base + fid.gain * best, 0.0, 1.0))

        if not payload.present:
            mask = np.zeros(self.mask_shape, dtype=bool)
            iou = float(np.clip(fid.absent_iou + payload.score_noise, 0.0, 1.0))
            occ = -fid.occ_scale * max(quality, 0.25)
            return ScoreReport(frame=frame, iou_score=iou, occlusion_logit=occ,
                               embedding=payload.corruption, mask=mask)

        mask, realized = self._synthesize_mask(payload, quality)
        iou = float(np.clip(realized + payload.score_noise, 0.0, 1.0))
        occ = fid.occ_scale * quality
        emb = self._corrupted_embedding(payload, realized)
        return ScoreReport(frame=frame, iou_score=iou, occlusion_logit=occ,
                           embedding=emb, mask=mask)

    def _synthesize_mask(self, payload: FramePayload,
                         quality: float) -> tuple[np.ndarray, float]:
        area = int(payload.fill_order.size)
        keep = min(area, math.ceil(quality * area))
        flat = np.zeros(self.mask_shape[0] * self.mask_shape[1], dtype=bool)
        flat[payload.fill_order[:keep]] = True
        return flat.reshape(self.mask_shape), keep / area

    def _corrupted_embedding(self, payload: FramePayload,
                             realized: float) -> np.ndarray:
        view = payload.viewpoint
        raw = payload.corruption
        perp = raw - (raw @ view) * view
        norm = float(np.linalg.norm(perp))
        if norm < 1e-9:
            perp = np.zeros_like(view)
            perp[np.argmin(np.abs(view))] = 1.0
            perp -= (perp @ view) * view
            norm = float(np.linalg.norm(perp))
        perp /= norm
        phi = (1.0 - realized) * self.fidelity.corruption_angle
        return math.cos(phi) * view + math.sin(phi) * perp

"""Untrained neural backend built on the fusion block.

Turns any payload exposing ``gt_mask`` (2-D binary) and ``viewpoint``
(1-D vector) into a deterministic score report: payload features are
projected into a small token grid, fused with text and memory tokens by
the block, and read out as a mask (thresholded channel projection,
nearest-neighbor upsampled to stream resolution), an IoU-style score, an
occlusion logit, and a unit embedding. Weights are random but seeded, so
identical inputs and seed give bit-identical outputs; nothing here is
trained and no output is expected to be accurate.
"""

from __future__ import annotations

import numpy as np

from ..core import FrameIndex, ScoreReport
from ..memory import MemoryEntry
from .block import (BlockParams, FeatureWindow, TextTokens, block_forward,
                    init_block_params)


def _nearest_indices(src: int, dst: int) -> np.ndarray:
    return np.minimum((np.arange(dst) * src) // dst, src - 1)


class NeuralToyBackend:
    """Seeded, deterministic segmentation backend at toy scale."""

    def __init__(self, mask_shape: tuple[int, int], embedding_dim: int = 8,
                 grid: tuple[int, int] = (4, 4), channels: int = 8,
                 state_dim: int = 4, n_heads: int = 1, seed: int = 0,
                 params: BlockParams | None = None):
        self.mask_shape = (int(mask_shape[0]), int(mask_shape[1]))
        self.embedding_dim = int(embedding_dim)
        self.grid = (int(grid[0]), int(grid[1]))
        self.channels = int(channels)
        self.params = params if params is not None else init_block_params(
            channels, state_dim=state_dim, n_heads=n_heads, seed=seed)

        rng = np.random.default_rng((seed, 0xBACD))
        bound = 1.0 / np.sqrt(self.embedding_dim)
        self._w_token = rng.uniform(-bound, bound,
                                    (self.embedding_dim, channels))
        self._channel_code = rng.uniform(-1.0, 1.0, channels)
        cb = 1.0 / np.sqrt(channels)
        self._w_mask = rng.uniform(-cb, cb, channels)
        self._w_iou = rng.uniform(-cb, cb, channels)
        self._w_occ = rng.uniform(-cb, cb, channels)
        self._w_emb = rng.uniform(-cb, cb, (channels, self.embedding_dim))

        self._rows_down = _nearest_indices(self.mask_shape[0], self.grid[0])
        self._cols_down = _nearest_indices(self.mask_shape[1], self.grid[1])
        self._rows_up = _nearest_indices(self.grid[0], self.mask_shape[0])
        self._cols_up = _nearest_indices(self.grid[1], self.mask_shape[1])

    def encode(self, frame: FrameIndex, payload) -> np.ndarray:
        mask = np.asarray(payload.gt_mask, dtype=np.float64)
        small = mask[np.ix_(self._rows_down, self._cols_down)]
        view = np.asarray(payload.viewpoint, dtype=np.float64)
        if view.shape != (self.embedding_dim,):
            raise ValueError(f"viewpoint dim {view.shape} does not match "
                             f"embedding dim {self.embedding_dim}")
        return (small[:, :, None] * self._channel_code
                + 0.1 * (view @ self._w_token))

    def _tokens(self, text_embedding: np.ndarray,
                memory_context: list[MemoryEntry] | None) -> TextTokens:
        rows = [np.asarray(text_embedding, dtype=np.float64) @ self._w_token]
        for entry in memory_context or []:
            rows.append(entry.embedding @ self._w_token)
        return TextTokens(tokens=np.stack(rows), cls_index=0)

    def segment(self, frame: FrameIndex, payload,
                text_embedding: np.ndarray,
                memory_context: list[MemoryEntry] | None,
                features: FeatureWindow) -> ScoreReport:
        current = self.encode(frame, payload)
        fused, cls = block_forward(current, features,
                                   self._tokens(text_embedding, memory_context),
                                   self.params)
        logits = fused @ self._w_mask
        mask = (logits > 0.0)[np.ix_(self._rows_up, self._cols_up)]

        scale = 1.0 / np.sqrt(self.channels)
        iou = 1.0 / (1.0 + np.exp(-float(cls @ self._w_iou) * scale))
        occ = float(cls @ self._w_occ) * scale
        emb = cls @ self._w_emb
        norm = float(np.linalg.norm(emb))
        if norm < 1e-12:
            emb = np.zeros(self.embedding_dim)
            emb[0] = 1.0
        else:
            emb = emb / norm
        return ScoreReport(frame=frame, iou_score=float(iou),
                           occlusion_logit=occ, embedding=emb, mask=mask)

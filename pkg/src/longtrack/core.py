"""Shared value types, score semantics, and elementary math.

Frame indices are plain non-negative ints, strictly increasing along a
stream. Embeddings are 1-D float64 numpy arrays; masks are 2-D boolean
numpy arrays with constant dims across one stream.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

FrameIndex = int


class MemoryPolicy(enum.Enum):
    """Memory-bank update policies selectable per tracking run."""

    VANILLA = "vanilla"
    EXTENDED = "extended"
    INTERVAL = "interval"
    DIVERSE = "diverse"


@dataclass(frozen=True)
class TrackerConfig:
    """Thresholds and capacities for gating and memory management.

    Defaults: occlusion threshold 0.9, IoU threshold 0.7, candidate
    admission threshold 0.95, window/pool sizes 5, long-term capacity 4
    (permanent initial slot included), short-term queue of 6.
    """

    delta_iou: float = 0.7
    delta_o: float = 0.9
    gamma_iou: float = 0.95
    n_w: int = 5
    n_p: int = 5
    n_l: int = 4
    short_term_capacity: int = 6
    policy: MemoryPolicy = MemoryPolicy.DIVERSE
    # Interval policy: push every `interval_stride` frames, retain the
    # `interval_keep` most recent such pushes (plus the permanent initial).
    interval_stride: int = 5
    interval_keep: int = 3

    def __post_init__(self) -> None:
        for name in ("delta_iou", "gamma_iou"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if not (0.0 < self.delta_o < 1.0):
            raise ValueError(f"delta_o must be in (0, 1), got {self.delta_o}")
        for name in ("n_w", "n_p", "n_l", "short_term_capacity",
                     "interval_stride", "interval_keep"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")


@dataclass(frozen=True)
class ScoreReport:
    """Per-frame prediction summary emitted by a segmentation backend.

    ``iou_score`` is the backend's self-estimate of mask overlap with
    ground truth, in [0, 1]. ``occlusion_logit`` is a signed presence
    confidence: positive means the object is visible, negative absent,
    magnitude is confidence. ``embedding`` is the memory-encoded frame
    feature and must be present whenever the frame may enter a memory
    bank. ``mask`` is the binary prediction at stream resolution.
    """

    frame: FrameIndex
    iou_score: float
    occlusion_logit: float
    embedding: np.ndarray | None = None
    mask: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.frame < 0:
            raise ValueError(f"frame index must be non-negative, got {self.frame}")
        if not (0.0 <= self.iou_score <= 1.0):
            raise ValueError(f"iou_score must be in [0, 1], got {self.iou_score}")
        if not math.isfinite(self.occlusion_logit):
            raise ValueError("occlusion_logit must be finite")
        if self.embedding is not None:
            object.__setattr__(self, "embedding",
                               np.asarray(self.embedding, dtype=np.float64))
            if self.embedding.ndim != 1 or self.embedding.size == 0:
                raise ValueError("embedding must be a non-empty 1-D vector")
        if self.mask is not None:
            object.__setattr__(self, "mask", np.asarray(self.mask, dtype=bool))
            if self.mask.ndim != 2:
                raise ValueError("mask must be a 2-D binary grid")

    @property
    def occ_prob(self) -> float:
        """Presence probability, sigmoid of the occlusion logit."""
        return sigmoid(self.occlusion_logit)


def sigmoid(x: float) -> float:
    """Numerically stable logistic function, strictly monotone on finite input."""
    if not math.isfinite(x):
        raise ValueError(f"sigmoid requires finite input, got {x}")
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1].

    Raises on dimension mismatch or a zero-norm operand; the clamp guards
    downstream acos/threshold logic against rounding above +/-1.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"embedding dims differ: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for zero-norm vector")
    return float(np.clip(float(a @ b) / (na * nb), -1.0, 1.0))

"""Synthetic scene scripts and deterministic stream generation.

A scene is a moving ellipse or rectangle on a pixel grid, visible during
declared presence intervals, observed under a viewpoint angle that
drifts piecewise-linearly between waypoints. Viewpoint embeddings live
on the unit circle spanned by the first two axes of the embedding space,
with seeded Gaussian jitter renormalized back to unit norm.

Every stochastic draw a downstream backend may need (score noise,
detection-quality noise, an embedding corruption direction) is made here
per frame, so runs are deterministic per seed and identical across
memory policies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage


@dataclass(frozen=True)
class SceneScript:
    """Full description of one synthetic scenario."""

    length: int
    seed: int = 0
    grid: tuple[int, int] = (32, 32)
    shape_kind: str = "ellipse"                      # ellipse | rectangle
    center: tuple[float, float] = (16.0, 16.0)       # (row, col) at t=0
    velocity: tuple[float, float] = (0.0, 0.0)       # pixels per frame
    oscillation_amplitude: tuple[float, float] = (0.0, 0.0)
    oscillation_period: float = 100.0
    axes: tuple[float, float] = (6.0, 4.0)           # semi-axes / half-extents
    presence: tuple[tuple[int, int], ...] | None = None  # inclusive; None=always
    drift_waypoints: tuple[tuple[float, float], ...] = ((0.0, 0.0),)
    detection_waypoints: tuple[tuple[float, float], ...] = ((0.0, 0.9),)
    noise_score: float = 0.02
    noise_embedding: float = 0.05
    embedding_dim: int = 8

    def __post_init__(self) -> None:
        if self.length < 0:
            raise ValueError("length must be non-negative")
        if self.grid[0] < 1 or self.grid[1] < 1:
            raise ValueError("grid dims must be positive")
        if self.axes[0] <= 0 or self.axes[1] <= 0:
            raise ValueError("shape axes must be positive")
        if self.shape_kind not in ("ellipse", "rectangle"):
            raise ValueError(f"unknown shape kind {self.shape_kind!r}")
        if self.embedding_dim < 2:
            raise ValueError("embedding dim must be >= 2 (unit-circle plane)")
        if self.presence is not None:
            for start, end in self.presence:
                if not (0 <= start <= end < max(self.length, 1)):
                    raise ValueError(f"presence interval [{start}, {end}] "
                                     f"outside [0, {self.length})")
        for name in ("drift_waypoints", "detection_waypoints"):
            pts = getattr(self, name)
            if len(pts) < 1:
                raise ValueError(f"{name} needs at least one point")
            frames = [p[0] for p in pts]
            if sorted(frames) != frames:
                raise ValueError(f"{name} must be sorted by frame")
        if self.noise_score < 0 or self.noise_embedding < 0:
            raise ValueError("noise levels must be non-negative")

    def with_seed(self, seed: int) -> "SceneScript":
        return replace(self, seed=seed)


@dataclass
class GroundTruth:
    masks: np.ndarray       # (L, H, W) bool; all-False rows on absent frames
    viewpoints: np.ndarray  # (L, D) unit rows
    present: np.ndarray     # (L,) bool
    angles: np.ndarray      # (L,) radians


@dataclass(frozen=True)
class FramePayload:
    """Everything a backend may consume for one frame."""

    frame: int
    present: bool
    gt_mask: np.ndarray
    viewpoint: np.ndarray
    detection_quality: float
    quality_noise: float
    score_noise: float
    corruption: np.ndarray
    fill_order: np.ndarray | None = field(default=None, repr=False)


def _interp(waypoints, length: int) -> np.ndarray:
    xs = np.array([p[0] for p in waypoints], dtype=np.float64)
    ys = np.array([p[1] for p in waypoints], dtype=np.float64)
    return np.interp(np.arange(length, dtype=np.float64), xs, ys)


def _presence_flags(script: SceneScript) -> np.ndarray:
    flags = np.zeros(script.length, dtype=bool)
    if script.presence is None:
        flags[:] = True
    else:
        for start, end in script.presence:
            flags[start:end + 1] = True
    return flags


def _render_mask(script: SceneScript, t: int) -> np.ndarray:
    cy, cx = script.center
    vy, vx = script.velocity
    ay, ax = script.oscillation_amplitude
    phase = 2.0 * math.pi * t / script.oscillation_period
    row = cy + vy * t + ay * math.sin(phase)
    col = cx + vx * t + ax * math.sin(phase)
    rows = np.arange(script.grid[0])[:, None] - row
    cols = np.arange(script.grid[1])[None, :] - col
    sy, sx = script.axes
    if script.shape_kind == "ellipse":
        return (rows / sy) ** 2 + (cols / sx) ** 2 <= 1.0
    return (np.abs(rows) <= sy) & (np.abs(cols) <= sx)


def _fill_order(mask: np.ndarray) -> np.ndarray:
    """Flat indices of mask pixels ordered deepest-first (ties by index)."""
    depth = ndimage.distance_transform_edt(mask).ravel()
    inside = np.flatnonzero(mask.ravel())
    return inside[np.lexsort((inside, -depth[inside]))]


def generate_stream(script: SceneScript) -> tuple[list[FramePayload], GroundTruth]:
    """Render the scenario: per-frame payloads plus ground truth."""
    length = script.length
    dim = script.embedding_dim
    rng = np.random.default_rng(script.seed)

    angles = _interp(script.drift_waypoints, length)
    detection = np.clip(_interp(script.detection_waypoints, length), 0.0, 1.0)
    present = _presence_flags(script)

    base = np.zeros((length, dim))
    base[:, 0] = np.cos(angles)
    base[:, 1] = np.sin(angles)
    viewpoints = base + script.noise_embedding * rng.normal(size=(length, dim))
    norms = np.linalg.norm(viewpoints, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    viewpoints /= norms

    quality_noise = script.noise_score * rng.normal(size=length)
    score_noise = script.noise_score * rng.normal(size=length)
    corruption = rng.normal(size=(length, dim))
    cnorm = np.linalg.norm(corruption, axis=1, keepdims=True)
    cnorm[cnorm == 0.0] = 1.0
    corruption /= cnorm

    masks = np.zeros((length, script.grid[0], script.grid[1]), dtype=bool)
    payloads: list[FramePayload] = []
    for t in range(length):
        if present[t]:
            masks[t] = _render_mask(script, t)
            if not masks[t].any():
                raise ValueError(f"object left the grid entirely at frame {t}")
        payloads.append(FramePayload(
            frame=t,
            present=bool(present[t]),
            gt_mask=masks[t],
            viewpoint=viewpoints[t],
            detection_quality=float(detection[t]),
            quality_noise=float(quality_noise[t]),
            score_noise=float(score_noise[t]),
            corruption=corruption[t],
            fill_order=_fill_order(masks[t]) if present[t] else None,
        ))
    gt = GroundTruth(masks=masks, viewpoints=viewpoints, present=present,
                     angles=angles)
    return payloads, gt

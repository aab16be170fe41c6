"""Depthwise 2-D convolution (cross-correlation, the deep-learning convention).

Each channel is filtered independently with its own odd-sized square
kernel, zero padding of half the kernel on every side, stride 1, so the
output shape equals the input shape and channels never mix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class DWConvParams:
    weights: np.ndarray  # (k, k, C), k odd
    bias: np.ndarray     # (C,)

    def __post_init__(self) -> None:
        if self.weights.ndim != 3 or self.weights.shape[0] != self.weights.shape[1]:
            raise ValueError(f"weights must be (k, k, C), got {self.weights.shape}")
        if self.weights.shape[0] % 2 != 1:
            raise ValueError("kernel size must be odd")
        if self.bias.shape != (self.weights.shape[2],):
            raise ValueError(f"bias shape {self.bias.shape} does not match "
                             f"{self.weights.shape[2]} channels")


def init_dwconv_params(channels: int, rng: np.random.Generator,
                       kernel_size: int = 7) -> DWConvParams:
    bound = 1.0 / kernel_size  # 1/sqrt(k*k) per-channel fan-in
    return DWConvParams(
        weights=rng.uniform(-bound, bound, (kernel_size, kernel_size, channels)),
        bias=rng.uniform(-bound, bound, channels),
    )


def dwconv_forward(grid: np.ndarray,
                   params: DWConvParams) -> tuple[np.ndarray, dict]:
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 3:
        raise ValueError(f"expected (H, W, C) input, got shape {grid.shape}")
    k = params.weights.shape[0]
    if grid.shape[2] != params.weights.shape[2]:
        raise ValueError(f"input has {grid.shape[2]} channels, weights expect "
                         f"{params.weights.shape[2]}")
    pad = k // 2
    height, width, _ = grid.shape
    padded = np.pad(grid, ((pad, pad), (pad, pad), (0, 0)))
    out = np.broadcast_to(params.bias, grid.shape).copy()
    for a in range(k):
        for b in range(k):
            out += params.weights[a, b] * padded[a:a + height, b:b + width]
    return out, {"padded": padded, "params": params, "shape": grid.shape}


def dwconv_backward(dout: np.ndarray, cache: dict) -> tuple[np.ndarray, dict]:
    padded, params = cache["padded"], cache["params"]
    height, width, _ = cache["shape"]
    k = params.weights.shape[0]
    pad = k // 2
    dpadded = np.zeros_like(padded)
    dweights = np.zeros_like(params.weights)
    for a in range(k):
        for b in range(k):
            dweights[a, b] = (padded[a:a + height, b:b + width] * dout).sum(axis=(0, 1))
            dpadded[a:a + height, b:b + width] += params.weights[a, b] * dout
    dgrid = dpadded[pad:pad + height, pad:pad + width]
    return dgrid, {"weights": dweights, "bias": dout.sum(axis=(0, 1))}


def dwconv7x7(grid: np.ndarray, params: DWConvParams) -> np.ndarray:
    """Forward-only convenience wrapper; validates the 7x7 contract."""
    if params.weights.shape[0] != 7:
        raise ValueError(f"expected a 7x7 kernel, got {params.weights.shape[0]}")
    out, _ = dwconv_forward(grid, params)
    return out

"""Layer normalization over the channel axis, with gain and bias."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS = 1e-6


@dataclass
class LayerNormParams:
    gain: np.ndarray  # (C,)
    bias: np.ndarray  # (C,)

    def __post_init__(self) -> None:
        if self.gain.shape != self.bias.shape or self.gain.ndim != 1:
            raise ValueError("gain and bias must be matching 1-D vectors")


def init_layernorm_params(channels: int) -> LayerNormParams:
    return LayerNormParams(gain=np.ones(channels), bias=np.zeros(channels))


def layernorm_forward(x: np.ndarray,
                      params: LayerNormParams) -> tuple[np.ndarray, dict]:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.gain.shape[0]:
        raise ValueError(f"last axis {x.shape[-1]} does not match "
                         f"{params.gain.shape[0]} channels")
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + EPS)
    xhat = (x - mu) * inv_std
    out = params.gain * xhat + params.bias
    return out, {"xhat": xhat, "inv_std": inv_std, "params": params}


def layernorm_backward(dout: np.ndarray, cache: dict) -> tuple[np.ndarray, dict]:
    xhat, inv_std, params = cache["xhat"], cache["inv_std"], cache["params"]
    channels = xhat.shape[-1]
    reduce_axes = tuple(range(dout.ndim - 1))
    grads = {
        "gain": (dout * xhat).sum(axis=reduce_axes),
        "bias": dout.sum(axis=reduce_axes),
    }
    dxhat = dout * params.gain
    dx = inv_std / channels * (
        channels * dxhat
        - dxhat.sum(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).sum(axis=-1, keepdims=True)
    )
    return dx, grads


def layernorm(x: np.ndarray, params: LayerNormParams) -> np.ndarray:
    out, _ = layernorm_forward(x, params)
    return out

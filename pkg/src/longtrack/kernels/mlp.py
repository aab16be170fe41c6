"""Inverted-bottleneck MLP: the hidden layer is four times the token width."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass
class MlpParams:
    w1: np.ndarray  # (C, 4C)
    b1: np.ndarray  # (4C,)
    w2: np.ndarray  # (4C, C)
    b2: np.ndarray  # (C,)

    def __post_init__(self) -> None:
        c, hidden = self.w1.shape
        if hidden != 4 * c:
            raise ValueError(f"hidden dim must be 4x input: got {hidden} for "
                             f"{c} channels")
        if self.b1.shape != (hidden,) or self.w2.shape != (hidden, c) \
                or self.b2.shape != (c,):
            raise ValueError("mlp parameter shapes are inconsistent")


def init_mlp_params(channels: int, rng: np.random.Generator) -> MlpParams:
    hidden = 4 * channels
    bound1 = 1.0 / np.sqrt(channels)
    bound2 = 1.0 / np.sqrt(hidden)
    return MlpParams(
        w1=rng.uniform(-bound1, bound1, (channels, hidden)),
        b1=rng.uniform(-bound1, bound1, hidden),
        w2=rng.uniform(-bound2, bound2, (hidden, channels)),
        b2=rng.uniform(-bound2, bound2, channels),
    )


def gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x / _SQRT2))


def gelu_grad(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + erf(x / _SQRT2)) \
        + x * _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def mlp_forward(x: np.ndarray, params: MlpParams) -> tuple[np.ndarray, dict]:
    """(tokens, C) -> (tokens, C); any residual is the caller's business."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.w1.shape[0]:
        raise ValueError(f"expected (tokens, {params.w1.shape[0]}) input, "
                         f"got shape {x.shape}")
    pre = x @ params.w1 + params.b1
    act = gelu(pre)
    out = act @ params.w2 + params.b2
    return out, {"x": x, "pre": pre, "act": act, "params": params}


def mlp_backward(dout: np.ndarray, cache: dict) -> tuple[np.ndarray, dict]:
    x, pre, act, params = cache["x"], cache["pre"], cache["act"], cache["params"]
    dact = dout @ params.w2.T
    dpre = dact * gelu_grad(pre)
    grads = {
        "w1": x.T @ dpre,
        "b1": dpre.sum(axis=0),
        "w2": act.T @ dout,
        "b2": dout.sum(axis=0),
    }
    return dpre @ params.w1.T, grads


def inverted_mlp(x: np.ndarray, params: MlpParams) -> np.ndarray:
    out, _ = mlp_forward(x, params)
    return out

"""Selective state-space scan over a token sequence.

Per channel c with state size N, the discretized recurrence is

    delta_t = softplus(x_t . w_delta[:, c] + b_delta[c])
    h_t     = exp(delta_t * A[c]) * h_{t-1} + delta_t * B_t * x_t[c]
    y_t[c]  = C_t . h_t

with h_0 = 0 and input-dependent B_t = x_t @ w_b, C_t = x_t @ w_c shared
across channels. A = -exp(a_log) keeps the state transition a strict
decay, so the recurrence is stable for any positive step size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ScanParams:
    a_log: np.ndarray    # (C, N) log-decay; A = -exp(a_log)
    w_delta: np.ndarray  # (C, C) input -> per-channel step size (pre-softplus)
    b_delta: np.ndarray  # (C,)
    w_b: np.ndarray      # (C, N) input -> state injection
    w_c: np.ndarray      # (C, N) input -> state readout

    def __post_init__(self) -> None:
        c, n = self.a_log.shape
        expected = {"w_delta": (c, c), "b_delta": (c,), "w_b": (c, n),
                    "w_c": (c, n)}
        for name, shape in expected.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
        for name in ("a_log", "w_delta", "b_delta", "w_b", "w_c"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite values")


def init_scan_params(channels: int, state_dim: int,
                     rng: np.random.Generator) -> ScanParams:
    bound = 1.0 / np.sqrt(channels)
    return ScanParams(
        a_log=rng.uniform(-1.0, 0.0, (channels, state_dim)),
        w_delta=rng.uniform(-bound, bound, (channels, channels)),
        b_delta=rng.uniform(-bound, bound, channels),
        w_b=rng.uniform(-bound, bound, (channels, state_dim)),
        w_c=rng.uniform(-bound, bound, (channels, state_dim)),
    )


def _softplus(u: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, u)


def scan_forward(x: np.ndarray, params: ScanParams) -> tuple[np.ndarray, dict]:
    """Run the recurrence over x of shape (L, C); returns (y, cache)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"expected (L, C) input, got shape {x.shape}")
    length, channels = x.shape
    if length < 1:
        raise ValueError("sequence length must be >= 1")
    if channels != params.a_log.shape[0]:
        raise ValueError(f"input has {channels} channels, params expect "
                         f"{params.a_log.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains non-finite values")

    state_dim = params.a_log.shape[1]
    a = -np.exp(params.a_log)                        # (C, N)
    u = x @ params.w_delta + params.b_delta          # (L, C)
    delta = _softplus(u)                             # (L, C)
    b_seq = x @ params.w_b                           # (L, N)
    c_seq = x @ params.w_c                           # (L, N)

    h = np.zeros((channels, state_dim))
    hs = np.empty((length, channels, state_dim))
    abars = np.empty((length, channels, state_dim))
    y = np.empty((length, channels))
    for t in range(length):
        abar = np.exp(delta[t][:, None] * a)
        h = abar * h + (delta[t] * x[t])[:, None] * b_seq[t][None, :]
        hs[t] = h
        abars[t] = abar
        y[t] = h @ c_seq[t]

    cache = {"x": x, "params": params, "a": a, "u": u, "delta": delta,
             "b_seq": b_seq, "c_seq": c_seq, "hs": hs, "abars": abars}
    return y, cache


def scan_backward(dy: np.ndarray, cache: dict) -> tuple[np.ndarray, dict]:
    """Vector-Jacobian product: gradients of sum(dy * y) w.r.t. x and params."""
    x, params = cache["x"], cache["params"]
    a, u, delta = cache["a"], cache["u"], cache["delta"]
    b_seq, c_seq = cache["b_seq"], cache["c_seq"]
    hs, abars = cache["hs"], cache["abars"]
    length, channels = x.shape
    state_dim = a.shape[1]

    da = np.zeros_like(a)
    ddelta = np.zeros((length, channels))
    db_seq = np.zeros_like(b_seq)
    dc_seq = np.zeros_like(c_seq)
    dx = np.zeros_like(x)
    dh = np.zeros((channels, state_dim))

    for t in reversed(range(length)):
        dc_seq[t] = hs[t].T @ dy[t]
        dh += dy[t][:, None] * c_seq[t][None, :]

        h_prev = hs[t - 1] if t > 0 else np.zeros_like(dh)
        dabar = dh * h_prev
        da += dabar * abars[t] * delta[t][:, None]
        ddelta[t] = (dabar * abars[t] * a).sum(axis=1)

        # input term: delta[t,c] * B_t[n] * x[t,c]
        ddelta[t] += (dh * b_seq[t][None, :]).sum(axis=1) * x[t]
        db_seq[t] = ((delta[t] * x[t])[:, None] * dh).sum(axis=0)
        dx[t] += delta[t] * (dh @ b_seq[t])

        dh = dh * abars[t]

    du = ddelta / (1.0 + np.exp(-u))  # softplus' = sigmoid
    dx += du @ params.w_delta.T
    dx += db_seq @ params.w_b.T
    dx += dc_seq @ params.w_c.T

    grads = {
        "a_log": da * a,  # A = -exp(a_log) so dA/da_log = A
        "w_delta": x.T @ du,
        "b_delta": du.sum(axis=0),
        "w_b": x.T @ db_seq,
        "w_c": x.T @ dc_seq,
    }
    return dx, grads


def selective_scan(x: np.ndarray, params: ScanParams) -> np.ndarray:
    """Forward-only convenience wrapper."""
    y, _ = scan_forward(x, params)
    return y

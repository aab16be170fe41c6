"""Scaled dot-product cross-attention with projections.

Queries and key/value tokens are projected into a shared model dim,
split across heads, attended with softmax(Q K^T / sqrt(d_head)) V, and
merged through an output projection. Every softmax row sums to one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class AttentionParams:
    wq: np.ndarray  # (dq_in, d)
    wk: np.ndarray  # (dkv_in, d)
    wv: np.ndarray  # (dkv_in, d)
    wo: np.ndarray  # (d, d_out)
    n_heads: int = 1

    def __post_init__(self) -> None:
        d = self.wq.shape[1]
        if self.wk.shape[1] != d or self.wv.shape[1] != d \
                or self.wo.shape[0] != d:
            raise ValueError("projection model dims are inconsistent")
        if self.wk.shape[0] != self.wv.shape[0]:
            raise ValueError("key and value projections expect the same input dim")
        if self.n_heads < 1 or d % self.n_heads != 0:
            raise ValueError(f"model dim {d} not divisible by {self.n_heads} heads")


def init_attention_params(dq_in: int, dkv_in: int, d: int,
                          rng: np.random.Generator, d_out: int | None = None,
                          n_heads: int = 1) -> AttentionParams:
    d_out = d if d_out is None else d_out
    return AttentionParams(
        wq=rng.uniform(-1, 1, (dq_in, d)) / np.sqrt(dq_in),
        wk=rng.uniform(-1, 1, (dkv_in, d)) / np.sqrt(dkv_in),
        wv=rng.uniform(-1, 1, (dkv_in, d)) / np.sqrt(dkv_in),
        wo=rng.uniform(-1, 1, (d, d_out)) / np.sqrt(d),
        n_heads=n_heads,
    )


def _split_heads(x: np.ndarray, n_heads: int) -> np.ndarray:
    tokens, d = x.shape
    return x.reshape(tokens, n_heads, d // n_heads).transpose(1, 0, 2)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    n_heads, tokens, dh = x.shape
    return x.transpose(1, 0, 2).reshape(tokens, n_heads * dh)


def _softmax_rows(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def attention_forward(queries: np.ndarray, keys_values: np.ndarray,
                      params: AttentionParams) -> tuple[np.ndarray, dict]:
    queries = np.asarray(queries, dtype=np.float64)
    keys_values = np.asarray(keys_values, dtype=np.float64)
    if queries.ndim != 2 or keys_values.ndim != 2:
        raise ValueError("queries and keys/values must be 2-D token matrices")
    if keys_values.shape[0] == 0:
        raise ValueError("attention requires at least one key/value token")
    if queries.shape[1] != params.wq.shape[0]:
        raise ValueError(f"query dim {queries.shape[1]} does not match "
                         f"projection input {params.wq.shape[0]}")
    if keys_values.shape[1] != params.wk.shape[0]:
        raise ValueError(f"key/value dim {keys_values.shape[1]} does not match "
                         f"projection input {params.wk.shape[0]}")

    q = _split_heads(queries @ params.wq, params.n_heads)      # (h, m, dh)
    k = _split_heads(keys_values @ params.wk, params.n_heads)  # (h, n, dh)
    v = _split_heads(keys_values @ params.wv, params.n_heads)  # (h, n, dh)
    scale = 1.0 / np.sqrt(q.shape[-1])
    weights = _softmax_rows(q @ k.transpose(0, 2, 1) * scale)  # (h, m, n)
    merged = _merge_heads(weights @ v)                          # (m, d)
    out = merged @ params.wo
    cache = {"queries": queries, "keys_values": keys_values, "params": params,
             "q": q, "k": k, "v": v, "weights": weights, "merged": merged,
             "scale": scale}
    return out, cache


def attention_backward(dout: np.ndarray, cache: dict) -> tuple[tuple[np.ndarray, np.ndarray], dict]:
    """Returns ((dqueries, dkeys_values), param grads)."""
    params = cache["params"]
    q, k, v, weights = cache["q"], cache["k"], cache["v"], cache["weights"]
    scale = cache["scale"]

    dmerged = dout @ params.wo.T
    dwo = cache["merged"].T @ dout
    dheads = _split_heads(dmerged, params.n_heads)             # (h, m, dh)

    dweights = dheads @ v.transpose(0, 2, 1)                   # (h, m, n)
    dv = weights.transpose(0, 2, 1) @ dheads                   # (h, n, dh)
    # softmax rows: dS = (dP - sum(dP*P)) * P
    dscores = (dweights - (dweights * weights).sum(axis=-1, keepdims=True)) \
        * weights
    dq = dscores @ k * scale
    dk = dscores.transpose(0, 2, 1) @ q * scale

    dq_proj = _merge_heads(dq)
    dk_proj = _merge_heads(dk)
    dv_proj = _merge_heads(dv)
    grads = {
        "wq": cache["queries"].T @ dq_proj,
        "wk": cache["keys_values"].T @ dk_proj,
        "wv": cache["keys_values"].T @ dv_proj,
        "wo": dwo,
    }
    dqueries = dq_proj @ params.wq.T
    dkeys_values = dk_proj @ params.wk.T + dv_proj @ params.wv.T
    return (dqueries, dkeys_values), grads


def cross_attention(queries: np.ndarray, keys_values: np.ndarray,
                    params: AttentionParams) -> np.ndarray:
    out, _ = attention_forward(queries, keys_values, params)
    return out


def attention_weights(queries: np.ndarray, keys_values: np.ndarray,
                      params: AttentionParams) -> np.ndarray:
    """Softmax matrix (heads, queries, keys); rows sum to one."""
    _, cache = attention_forward(queries, keys_values, params)
    return cache["weights"]

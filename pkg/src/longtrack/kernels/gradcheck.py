"""Finite-difference verification of the analytic backward passes.

Each registered op builds a small random problem (parameters plus
inputs), computes analytic gradients of the scalar loss ``sum(output)``,
and compares them element-wise against central differences. The reported
figure is the max over every parameter and input element of

    |analytic - numeric| / max(1, |numeric|)

Validated step sizes are 1e-6 <= eps <= 1e-3 in double precision; values
outside that range still run but emit a warning.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .attention import AttentionParams, attention_backward, attention_forward
from .conv import DWConvParams, dwconv_backward, dwconv_forward
from .mlp import MlpParams, mlp_backward, mlp_forward
from .norm import LayerNormParams, layernorm_backward, layernorm_forward
from .scan import ScanParams, scan_backward, scan_forward

EPS_RANGE = (1e-6, 1e-3)


@dataclass
class OpProblem:
    """A concrete differentiable instance: named arrays and two evaluators."""

    arrays: dict[str, np.ndarray]
    forward: Callable[[dict[str, np.ndarray]], np.ndarray]
    analytic: Callable[[dict[str, np.ndarray]], dict[str, np.ndarray]]


def _scan_problem(rng: np.random.Generator) -> OpProblem:
    length = int(rng.integers(2, 9))
    channels = int(rng.integers(1, 5))
    state = int(rng.integers(1, 5))
    arrays = {
        "x": rng.normal(size=(length, channels)),
        "a_log": rng.uniform(-1.0, 0.0, (channels, state)),
        "w_delta": rng.normal(size=(channels, channels)) * 0.5,
        "b_delta": rng.normal(size=channels) * 0.5,
        "w_b": rng.normal(size=(channels, state)) * 0.5,
        "w_c": rng.normal(size=(channels, state)) * 0.5,
    }

    def forward(a):
        params = ScanParams(a["a_log"], a["w_delta"], a["b_delta"],
                            a["w_b"], a["w_c"])
        y, _ = scan_forward(a["x"], params)
        return y

    def analytic(a):
        params = ScanParams(a["a_log"], a["w_delta"], a["b_delta"],
                            a["w_b"], a["w_c"])
        y, cache = scan_forward(a["x"], params)
        dx, grads = scan_backward(np.ones_like(y), cache)
        return {"x": dx, **grads}

    return OpProblem(arrays, forward, analytic)


def _dwconv_problem(rng: np.random.Generator) -> OpProblem:
    height = int(rng.integers(2, 6))
    width = int(rng.integers(2, 6))
    channels = int(rng.integers(1, 4))
    arrays = {
        "x": rng.normal(size=(height, width, channels)),
        "weights": rng.normal(size=(7, 7, channels)) * 0.2,
        "bias": rng.normal(size=channels) * 0.2,
    }

    def forward(a):
        out, _ = dwconv_forward(a["x"], DWConvParams(a["weights"], a["bias"]))
        return out

    def analytic(a):
        out, cache = dwconv_forward(a["x"], DWConvParams(a["weights"], a["bias"]))
        dx, grads = dwconv_backward(np.ones_like(out), cache)
        return {"x": dx, **grads}

    return OpProblem(arrays, forward, analytic)


def _mlp_problem(rng: np.random.Generator) -> OpProblem:
    tokens = int(rng.integers(1, 6))
    channels = int(rng.integers(1, 5))
    hidden = 4 * channels
    arrays = {
        "x": rng.normal(size=(tokens, channels)),
        "w1": rng.normal(size=(channels, hidden)) * 0.5,
        "b1": rng.normal(size=hidden) * 0.5,
        "w2": rng.normal(size=(hidden, channels)) * 0.5,
        "b2": rng.normal(size=channels) * 0.5,
    }

    def forward(a):
        out, _ = mlp_forward(a["x"], MlpParams(a["w1"], a["b1"], a["w2"], a["b2"]))
        return out

    def analytic(a):
        out, cache = mlp_forward(a["x"],
                                 MlpParams(a["w1"], a["b1"], a["w2"], a["b2"]))
        dx, grads = mlp_backward(np.ones_like(out), cache)
        return {"x": dx, **grads}

    return OpProblem(arrays, forward, analytic)


def _attention_problem(rng: np.random.Generator) -> OpProblem:
    m = int(rng.integers(1, 6))
    n = int(rng.integers(1, 6))
    d = 2 * int(rng.integers(1, 3))
    arrays = {
        "queries": rng.normal(size=(m, d)),
        "keys_values": rng.normal(size=(n, d)),
        "wq": rng.normal(size=(d, d)) * 0.5,
        "wk": rng.normal(size=(d, d)) * 0.5,
        "wv": rng.normal(size=(d, d)) * 0.5,
        "wo": rng.normal(size=(d, d)) * 0.5,
    }
    n_heads = int(rng.choice([1, 2]))

    def params_of(a):
        return AttentionParams(a["wq"], a["wk"], a["wv"], a["wo"],
                               n_heads=n_heads)

    def forward(a):
        out, _ = attention_forward(a["queries"], a["keys_values"], params_of(a))
        return out

    def analytic(a):
        out, cache = attention_forward(a["queries"], a["keys_values"],
                                       params_of(a))
        (dq, dkv), grads = attention_backward(np.ones_like(out), cache)
        return {"queries": dq, "keys_values": dkv, **grads}

    return OpProblem(arrays, forward, analytic)


def _layernorm_problem(rng: np.random.Generator) -> OpProblem:
    tokens = int(rng.integers(1, 6))
    channels = int(rng.integers(2, 6))
    arrays = {
        "x": rng.normal(size=(tokens, channels)),
        "gain": rng.normal(size=channels),
        "bias": rng.normal(size=channels),
    }

    def forward(a):
        out, _ = layernorm_forward(a["x"], LayerNormParams(a["gain"], a["bias"]))
        return out

    def analytic(a):
        out, cache = layernorm_forward(a["x"],
                                       LayerNormParams(a["gain"], a["bias"]))
        dx, grads = layernorm_backward(np.ones_like(out), cache)
        return {"x": dx, **grads}

    return OpProblem(arrays, forward, analytic)


PROBLEM_BUILDERS: dict[str, Callable[[np.random.Generator], OpProblem]] = {
    "selective_scan": _scan_problem,
    "dwconv": _dwconv_problem,
    "inverted_mlp": _mlp_problem,
    "cross_attention": _attention_problem,
    "layernorm": _layernorm_problem,
}

OP_NAMES = tuple(PROBLEM_BUILDERS)


def max_relative_error(problem: OpProblem, eps: float) -> float:
    """Max relative gap between analytic and central-difference gradients."""
    analytic = problem.analytic(problem.arrays)
    worst = 0.0
    for name, base in problem.arrays.items():
        grad = analytic[name]
        if not np.all(np.isfinite(grad)):
            raise FloatingPointError(f"non-finite analytic gradient for {name}")
        work = {k: v.copy() for k, v in problem.arrays.items()}
        flat = work[name].ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            hi = float(problem.forward(work).sum())
            flat[i] = orig - eps
            lo = float(problem.forward(work).sum())
            flat[i] = orig
            numeric = (hi - lo) / (2.0 * eps)
            err = abs(grad.ravel()[i] - numeric) / max(1.0, abs(numeric))
            worst = max(worst, err)
    return worst


def grad_check(op_id: str, seed: int = 0, eps: float = 1e-4) -> float:
    """Run one finite-difference check for a named op; returns the max error."""
    if op_id not in PROBLEM_BUILDERS:
        raise KeyError(f"unknown op {op_id!r}; known: {', '.join(OP_NAMES)}")
    if not (EPS_RANGE[0] <= eps <= EPS_RANGE[1]):
        warnings.warn(
            f"eps={eps:g} is outside the validated range "
            f"[{EPS_RANGE[0]:g}, {EPS_RANGE[1]:g}]; results may be inaccurate",
            stacklevel=2)
    problem = PROBLEM_BUILDERS[op_id](np.random.default_rng(seed))
    return max_relative_error(problem, eps)

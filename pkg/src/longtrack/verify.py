"""Named property/oracle suites behind the ``verify`` command.

Each suite checks a streaming implementation against an independent
brute-force evaluator (or hand-computed values) over randomized inputs.
Suites accept injectable implementations so their sensitivity can itself
be tested with deliberately broken variants.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from .core import MemoryPolicy, ScoreReport, TrackerConfig, cosine_similarity
from .gate import InitialFrameGate, qualifies
from .kernels.scan import ScanParams, init_scan_params, scan_forward
from .memory import CandidatePool, MemoryBank, MemoryEntry, MemoryKind
from .sim.metrics import boundary_pixels, frame_boundary_f, frame_iou


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def brute_force_selection(reports: list[ScoreReport],
                          config: TrackerConfig) -> tuple[int, int] | None:
    """Reference gate: scan every frame's trailing window explicitly.

    Returns (selected frame, decision frame) or None. Independent of the
    streaming gate: no shared state, plain list slicing.
    """
    n = config.n_w
    for idx in range(len(reports)):
        if idx < n - 1:
            continue
        window = reports[idx - n + 1:idx + 1]
        if all(qualifies(r, config) for r in window):
            best = window[0]
            for r in window[1:]:
                if r.iou_score > best.iou_score:
                    best = r
            return best.frame, reports[idx].frame
    return None


def streaming_selection(reports: list[ScoreReport], config: TrackerConfig,
                        gate_cls=InitialFrameGate) -> tuple[int, int] | None:
    gate = gate_cls(config)
    for r in reports:
        selection = gate.observe(r)
        if selection is not None:
            return selection.frame, selection.decided_at
    return None


def _random_stream(rng: np.random.Generator) -> tuple[list[ScoreReport], TrackerConfig]:
    config = TrackerConfig(
        delta_iou=float(rng.uniform(0.3, 0.9)),
        delta_o=float(rng.uniform(0.6, 0.95)),
        n_w=int(rng.integers(2, 8)),
    )
    length = int(rng.integers(1, 201))
    easy = rng.random() < 0.5  # bias half the streams toward firing
    reports = []
    for t in range(length):
        if easy:
            iou = float(rng.uniform(config.delta_iou - 0.05, 1.0))
            occ = float(rng.normal(4.0, 2.0))
        else:
            iou = float(rng.uniform(0.0, 1.0))
            occ = float(rng.normal(0.0, 4.0))
        reports.append(ScoreReport(frame=t, iou_score=min(iou, 1.0),
                                   occlusion_logit=occ))
    return reports, config


def suite_gate(seed: int = 0, n_streams: int = 1000,
               gate_cls=InitialFrameGate) -> SuiteResult:
    """Streaming gate equals the brute-force window scan, exactly."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    fired = 0
    for i in range(n_streams):
        reports, config = _random_stream(rng)
        expect = brute_force_selection(reports, config)
        got = streaming_selection(reports, config, gate_cls)
        if expect != got:
            return SuiteResult(
                "gate", False,
                f"stream {i}: brute force {expect} vs streaming {got}",
                time.perf_counter() - start)
        if expect is not None:
            fired += 1
    return SuiteResult("gate", True,
                       f"{n_streams} streams, {fired} selections, exact match",
                       time.perf_counter() - start)


def brute_force_argmin(entries: list[MemoryEntry],
                       latest: MemoryEntry) -> MemoryEntry:
    """Exhaustive diversity argmin with lowest-frame tie-break."""
    sims = [(cosine_similarity(e.embedding, latest.embedding), e.frame, e)
            for e in entries]
    best = min(sims, key=lambda s: (s[0], s[1]))
    return best[2]


def _random_entry(rng: np.random.Generator, frame: int, dim: int) -> MemoryEntry:
    vec = rng.normal(size=dim)
    while float(np.linalg.norm(vec)) == 0.0:
        vec = rng.normal(size=dim)
    return MemoryEntry(frame=frame, embedding=vec,
                       iou_score=float(rng.uniform(0.9, 1.0)),
                       kind=MemoryKind.LONG_TERM)


def suite_memory(seed: int = 0, n_pools: int = 1000, n_updates: int = 10_000,
                 pool_cls=CandidatePool) -> SuiteResult:
    """Diversity selection vs exhaustive argmin; permanence and capacities."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)

    for i in range(n_pools):
        dim = int(rng.integers(2, 7))
        capacity = int(rng.integers(1, 8))
        pool = pool_cls(capacity)
        entries = []
        # duplicate embeddings now and then so ties actually occur
        for k in range(capacity):
            if entries and rng.random() < 0.25:
                entry = replace(entries[-1], frame=entries[-1].frame + 1)
            else:
                entry = _random_entry(rng, k if not entries
                                      else entries[-1].frame + 1, dim)
            entries.append(entry)
            pool.offer(entry, gamma_iou=0.0)
        latest = _random_entry(rng, 10_000, dim)
        expect = brute_force_argmin(entries, latest)
        got = pool.select_diverse(latest)
        if got.frame != expect.frame:
            return SuiteResult("memory", False,
                               f"pool {i}: argmin picked {got.frame}, "
                               f"brute force {expect.frame}",
                               time.perf_counter() - start)
        if len(pool) != 0:
            return SuiteResult("memory", False,
                               f"pool {i} not cleared after selection",
                               time.perf_counter() - start)

    config = TrackerConfig(policy=MemoryPolicy.DIVERSE)
    initial = ScoreReport(frame=0, iou_score=0.99, occlusion_logit=5.0,
                          embedding=rng.normal(size=8))
    bank = MemoryBank(initial, config)
    for t in range(1, n_updates + 1):
        report = ScoreReport(frame=t, iou_score=float(rng.uniform(0.0, 1.0)),
                             occlusion_logit=float(rng.normal(0.0, 3.0)),
                             embedding=rng.normal(size=8))
        bank.update(report)
        context = bank.assemble_context()
        if context[0].kind is not MemoryKind.INITIAL or context[0].frame != 0:
            return SuiteResult("memory", False,
                               f"step {t}: initial entry missing from context",
                               time.perf_counter() - start)
        if len(bank.short_term) > config.short_term_capacity:
            return SuiteResult("memory", False, f"step {t}: short-term overflow",
                               time.perf_counter() - start)
        if 1 + len(bank.long_term.queue) > config.n_l:
            return SuiteResult("memory", False, f"step {t}: long-term overflow",
                               time.perf_counter() - start)
        if len(bank.pool) > config.n_p:
            return SuiteResult("memory", False, f"step {t}: pool overflow",
                               time.perf_counter() - start)
    return SuiteResult("memory", True,
                       f"{n_pools} pools exact, {n_updates} updates invariant",
                       time.perf_counter() - start)


def unrolled_scan_reference(x: np.ndarray, params: ScanParams) -> np.ndarray:
    """Explicit product-form unrolling of the scan recurrence.

    y_t[c] = sum_{s<=t} (prod_{r=s+1..t} abar_r[c]) * delta_s[c] x_s[c] B_s . C_t
    """
    length, channels = x.shape
    a = -np.exp(params.a_log)
    u = x @ params.w_delta + params.b_delta
    delta = np.logaddexp(0.0, u)
    b_seq = x @ params.w_b
    c_seq = x @ params.w_c
    abar = np.exp(delta[:, :, None] * a[None, :, :])  # (L, C, N)
    y = np.zeros((length, channels))
    for t in range(length):
        for c in range(channels):
            acc = np.zeros(params.a_log.shape[1])
            for s in range(t + 1):
                decay = np.ones(params.a_log.shape[1])
                for r in range(s + 1, t + 1):
                    decay = decay * abar[r, c]
                acc += decay * delta[s, c] * x[s, c] * b_seq[s]
            y[t, c] = acc @ c_seq[t]
    return y


def suite_scan(seed: int = 0, n_trials: int = 30,
               scan_fn: Callable = scan_forward) -> SuiteResult:
    """Streaming scan vs explicit unrolling (1e-10) plus exact causality."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_trials):
        length = int(rng.integers(1, 17))
        channels = int(rng.integers(1, 5))
        state = int(rng.integers(1, 9))
        params = init_scan_params(channels, state, rng)
        x = rng.normal(size=(length, channels))
        y_stream, _ = scan_fn(x, params)
        y_ref = unrolled_scan_reference(x, params)
        gap = float(np.max(np.abs(y_stream - y_ref)))
        worst = max(worst, gap)
        if gap > 1e-10:
            return SuiteResult("scan", False,
                               f"trial {i}: streaming vs unrolled gap {gap:g}",
                               time.perf_counter() - start)
        if length >= 2:
            t_hit = int(rng.integers(1, length))
            x2 = x.copy()
            x2[t_hit] += rng.normal(size=channels)
            y2, _ = scan_fn(x2, params)
            if not np.array_equal(y_stream[:t_hit], y2[:t_hit]):
                return SuiteResult("scan", False,
                                   f"trial {i}: perturbing frame {t_hit} "
                                   f"changed earlier outputs",
                                   time.perf_counter() - start)
    return SuiteResult("scan", True,
                       f"{n_trials} trials, worst gap {worst:.2e}, causal",
                       time.perf_counter() - start)


# Hand-computed region-overlap cases: (pred rows, gt rows, exact value).
_J_CASES: list[tuple[list[str], list[str], Fraction]] = [
    (["11", "11"], ["11", "11"], Fraction(1)),            # identical
    (["10", "00"], ["01", "00"], Fraction(0)),            # disjoint
    (["00", "00"], ["00", "00"], Fraction(1)),            # both empty
    (["11", "00"], ["00", "00"], Fraction(0)),            # one empty
    (["00", "00"], ["10", "00"], Fraction(0)),            # other empty
    (["11", "10"], ["11", "01"], Fraction(2, 4)),         # 2 of 4 union
    (["1100", "1100"], ["0110", "0110"], Fraction(2, 6)), # 2 of 6 union
    (["111", "000"], ["110", "000"], Fraction(2, 3)),
    (["1", "1"], ["1", "0"], Fraction(1, 2)),
    (["1111"], ["0110"], Fraction(2, 4)),
    (["10", "01"], ["10", "01"], Fraction(1)),
    (["110", "110", "000"], ["011", "011", "000"], Fraction(2, 6)),
]


def _parse_rows(rows: list[str]) -> np.ndarray:
    return np.array([[ch == "1" for ch in row] for row in rows])


def brute_force_boundary_f(pred: np.ndarray, gt: np.ndarray,
                           tolerance: float = 1.0) -> float:
    """Exhaustive pairwise boundary matcher (quadratic, test-only)."""
    pred_any, gt_any = bool(pred.any()), bool(gt.any())
    if not pred_any and not gt_any:
        return 1.0
    if pred_any != gt_any:
        return 0.0
    pb = np.argwhere(boundary_pixels(pred))
    gb = np.argwhere(boundary_pixels(gt))
    tol2 = tolerance * tolerance

    def matched(points, others) -> int:
        count = 0
        for p in points:
            for o in others:
                d = p - o
                if d[0] * d[0] + d[1] * d[1] <= tol2:
                    count += 1
                    break
        return count

    precision = matched(pb, gb) / len(pb)
    recall = matched(gb, pb) / len(gb)
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def suite_metrics(seed: int = 0, n_pairs: int = 500,
                  j_fn: Callable = frame_iou,
                  f_fn: Callable = frame_boundary_f) -> SuiteResult:
    """J on hand-counted fixtures; F vs the exhaustive matcher, exact."""
    start = time.perf_counter()
    for i, (pred_rows, gt_rows, expect) in enumerate(_J_CASES):
        got = j_fn(_parse_rows(pred_rows), _parse_rows(gt_rows))
        if got != float(expect):
            return SuiteResult("metrics", False,
                               f"J case {i}: got {got}, expected {expect}",
                               time.perf_counter() - start)
    rng = np.random.default_rng(seed)
    for i in range(n_pairs):
        h = int(rng.integers(1, 17))
        w = int(rng.integers(1, 17))
        density = rng.uniform(0.1, 0.9)
        pred = rng.random((h, w)) < density
        gt = rng.random((h, w)) < density
        tol = float(rng.choice([1.0, 2.0]))
        got = f_fn(pred, gt, tol)
        expect = brute_force_boundary_f(pred, gt, tol)
        if got != expect:
            return SuiteResult("metrics", False,
                               f"F pair {i}: production {got} vs "
                               f"brute force {expect}",
                               time.perf_counter() - start)
    return SuiteResult("metrics", True,
                       f"{len(_J_CASES)} J fixtures, {n_pairs} F pairs exact",
                       time.perf_counter() - start)


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "gate": suite_gate,
    "memory": suite_memory,
    "scan": suite_scan,
    "metrics": suite_metrics,
}


def run_suites(names: list[str] | None = None, seed: int = 0) -> list[SuiteResult]:
    chosen = names if names else list(SUITES)
    unknown = [n for n in chosen if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suites: {unknown}; known: {list(SUITES)}")
    return [SUITES[name](seed=seed) for name in chosen]

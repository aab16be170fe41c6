"""Run trackers over synthetic scenes and compare policies or gate modes."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..core import MemoryPolicy, TrackerConfig
from ..tracker import GateMode, RunRecord, Tracker, run_stream
from .metrics import evaluate_f, evaluate_j, jf_mean
from .oracle import FidelityModel, OracleBackend
from .scene import SceneScript, generate_stream

POLICY_NAMES = {p.value: p for p in MemoryPolicy}


def config_for_policy(name: str, base: TrackerConfig | None = None) -> TrackerConfig:
    if name not in POLICY_NAMES:
        raise KeyError(f"unknown policy {name!r}; known: "
                       f"{', '.join(sorted(POLICY_NAMES))}")
    base = base if base is not None else TrackerConfig()
    return replace(base, policy=POLICY_NAMES[name])


@dataclass(frozen=True)
class RunMetrics:
    label: str
    seed: int
    j: float
    f: float
    jf: float
    initial_frame: int | None
    decided_at: int | None
    memory_span_final: int
    memory_span_max: int
    policy_time_ns_mean: float

    def row(self) -> dict:
        return {
            "label": self.label, "seed": self.seed,
            "j": self.j, "f": self.f, "jf": self.jf,
            "initial_frame": self.initial_frame,
            "decided_at": self.decided_at,
            "memory_span_final": self.memory_span_final,
            "memory_span_max": self.memory_span_max,
        }


def run_scenario(script: SceneScript, fidelity: FidelityModel,
                 config: TrackerConfig,
                 gate_mode: GateMode = GateMode.WINDOWED,
                 label: str | None = None) -> tuple[RunRecord, RunMetrics]:
    """One tracker over one rendered stream, with J/F over every frame."""
    payloads, gt = generate_stream(script)
    backend = OracleBackend(fidelity, mask_shape=script.grid,
                            embedding_dim=script.embedding_dim)
    text = np.zeros(script.embedding_dim)
    text[0] = 1.0
    tracker = Tracker(config, backend, text, gate_mode=gate_mode)
    record = run_stream(tracker, payloads)

    preds = [o.report.mask for o in record.outputs]
    j = evaluate_j(preds, list(gt.masks))
    f = evaluate_f(preds, list(gt.masks))
    metrics = RunMetrics(
        label=label if label is not None else config.policy.value,
        seed=script.seed,
        j=j, f=f, jf=jf_mean(j, f),
        initial_frame=record.summary["initial_frame"],
        decided_at=record.summary["decided_at"],
        memory_span_final=record.summary.get("memory_span_final", 0),
        memory_span_max=record.summary.get("memory_span_max", 0),
        policy_time_ns_mean=record.summary["policy_time_ns_mean"],
    )
    return record, metrics


def _aggregate(rows: list[RunMetrics]) -> dict:
    by_label: dict[str, list[RunMetrics]] = {}
    for r in rows:
        by_label.setdefault(r.label, []).append(r)
    agg = {}
    for label, rs in by_label.items():
        jfs = np.array([r.jf for r in rs])
        agg[label] = {
            "n": len(rs),
            "j_mean": float(np.mean([r.j for r in rs])),
            "j_std": float(np.std([r.j for r in rs])),
            "f_mean": float(np.mean([r.f for r in rs])),
            "f_std": float(np.std([r.f for r in rs])),
            "jf_mean": float(np.mean(jfs)),
            "jf_std": float(np.std(jfs)),
            "jf_sem": float(np.std(jfs) / np.sqrt(len(rs))) if len(rs) > 1 else 0.0,
            "memory_span_final_mean":
                float(np.mean([r.memory_span_final for r in rs])),
        }
    return agg


def _ranking(agg: dict) -> dict:
    ordered = sorted(agg, key=lambda k: agg[k]["jf_mean"], reverse=True)
    separations = []
    for hi, lo in zip(ordered, ordered[1:]):
        gap = agg[hi]["jf_mean"] - agg[lo]["jf_mean"]
        pooled = float(np.hypot(agg[hi]["jf_sem"], agg[lo]["jf_sem"]))
        separations.append(gap / pooled if pooled > 0 else float("inf"))
    return {
        "ordering": ordered,
        "adjacent_separation": separations,
        # ordering is only worth reporting when every adjacent gap clears
        # two pooled standard errors
        "ordering_significant": bool(separations
                                     and min(separations) >= 2.0),
    }


def compare_policies(script: SceneScript, fidelity: FidelityModel,
                     policies: list[str], seeds: list[int],
                     base: TrackerConfig | None = None) -> dict:
    """Identical streams per seed, one run per policy; Table-style report."""
    if len(policies) < 2:
        raise ValueError("need at least two policies to compare")
    rows: list[RunMetrics] = []
    timing: dict[str, list[float]] = {p: [] for p in policies}
    for seed in seeds:
        seeded = script.with_seed(seed)
        for name in policies:
            _, metrics = run_scenario(seeded, fidelity,
                                      config_for_policy(name, base))
            rows.append(metrics)
            timing[name].append(metrics.policy_time_ns_mean)
    agg = _aggregate(rows)
    report = {
        "rows": [r.row() for r in rows],
        "aggregate": agg,
        **_ranking(agg),
    }
    timing_stats = {name: {"policy_time_ns_mean": float(np.mean(ts)),
                           "policy_time_ns_std": float(np.std(ts))}
                    for name, ts in timing.items()}
    return report, timing_stats


def compare_gate_modes(script: SceneScript, fidelity: FidelityModel,
                       config: TrackerConfig, seeds: list[int]) -> dict:
    """Windowed gate versus first-qualifier ablation on identical streams."""
    rows: list[RunMetrics] = []
    for seed in seeds:
        seeded = script.with_seed(seed)
        for label, mode in (("windowed", GateMode.WINDOWED),
                            ("first_qualifier", GateMode.FIRST_QUALIFIER)):
            _, metrics = run_scenario(seeded, fidelity, config,
                                      gate_mode=mode, label=label)
            rows.append(metrics)
    agg = _aggregate(rows)
    return {"rows": [r.row() for r in rows], "aggregate": agg, **_ranking(agg)}

"""Two-stage streaming tracker over a pluggable segmentation backend.

A run starts in the detecting stage: every frame is segmented without
memory conditioning and fed to the initial-frame gate. When the gate
fires, the selected frame's retained prediction seeds the memory bank as
the permanent initial entry (even when the decision lands a few frames
later) and the tracker flips to the tracking stage, where the backend is
conditioned on the assembled memory context and each new report updates
the bank. The transition happens at most once per run.

The per-frame policy overhead (gate plus memory bookkeeping, backend
excluded) is measured with a monotonic clock and reported on each step;
it stays out of the serialized run records so replays are byte-stable.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Any, Iterable, Protocol, runtime_checkable

import numpy as np

from .core import FrameIndex, ScoreReport, TrackerConfig, sigmoid
from .gate import InitialFrameGate, InitialSelection, qualifies
from .kernels.block import FeatureWindow
from .memory import MemoryBank, MemoryEntry


@runtime_checkable
class SegmentationBackend(Protocol):
    """Deterministic per-frame segmentation engine.

    ``segment`` receives the assembled memory context during tracking and
    ``None`` while detecting; ``encode`` supplies the feature grid kept in
    the two-slot feature window. Implementations must be safe to share
    across tracker instances.
    """

    embedding_dim: int
    mask_shape: tuple[int, int]

    def encode(self, frame: FrameIndex, payload: Any) -> np.ndarray: ...

    def segment(self, frame: FrameIndex, payload: Any,
                text_embedding: np.ndarray,
                memory_context: list[MemoryEntry] | None,
                features: FeatureWindow) -> ScoreReport: ...


class Stage(enum.Enum):
    DETECTING = "detecting"
    TRACKING = "tracking"


class GateMode(enum.Enum):
    """How the detection stage decides the initial frame."""

    WINDOWED = "windowed"           # full sliding-window gate
    FIRST_QUALIFIER = "first"       # ablation: first frame past both thresholds


@dataclass
class StepOutput:
    frame: FrameIndex
    stage_after: Stage
    report: ScoreReport
    selection: InitialSelection | None = None
    memory: dict | None = None
    policy_time_ns: int = 0

    def to_record(self) -> dict:
        """JSON-ready run record; timing is deliberately excluded."""
        rec = {
            "frame": self.frame,
            "stage": self.stage_after.value,
            "iou": float(self.report.iou_score),
            "occ_prob": sigmoid(self.report.occlusion_logit),
            "selection": None,
            "memory": self.memory,
        }
        if self.selection is not None:
            rec["selection"] = {"frame": self.selection.frame,
                                "decided_at": self.selection.decided_at}
        return rec


class Tracker:
    """Single-owner state machine for one referred object on one stream."""

    def __init__(self, config: TrackerConfig, backend: SegmentationBackend,
                 text_embedding: np.ndarray,
                 gate_mode: GateMode = GateMode.WINDOWED,
                 start_frame: FrameIndex = 0):
        self.config = config
        self.backend = backend
        self.text_embedding = np.asarray(text_embedding, dtype=np.float64)
        self.gate_mode = gate_mode
        self.stage = Stage.DETECTING
        self.gate = InitialFrameGate(config)
        self.bank: MemoryBank | None = None
        self.features = FeatureWindow()
        self._next_frame = start_frame

    def step(self, payload: Any) -> StepOutput:
        frame = self._next_frame
        self._next_frame += 1
        if self.stage is Stage.DETECTING:
            out = self._step_detecting(frame, payload)
        else:
            out = self._step_tracking(frame, payload)
        self.features.update(self.backend.encode(frame, payload), frame)
        return out

    def _step_detecting(self, frame: FrameIndex, payload: Any) -> StepOutput:
        report = self.backend.segment(frame, payload, self.text_embedding,
                                      None, self.features)
        t0 = time.perf_counter_ns()
        if self.gate_mode is GateMode.WINDOWED:
            selection = self.gate.observe(report)
        else:
            selection = None
            if qualifies(report, self.config):
                selection = InitialSelection(frame=report.frame, report=report,
                                             decided_at=report.frame)
        if selection is not None:
            self.bank = MemoryBank(selection.report, self.config)
            self.stage = Stage.TRACKING
        elapsed = time.perf_counter_ns() - t0
        memory = self._memory_summary() if selection is not None else None
        return StepOutput(frame=frame, stage_after=self.stage, report=report,
                          selection=selection, memory=memory,
                          policy_time_ns=elapsed)

    def _step_tracking(self, frame: FrameIndex, payload: Any) -> StepOutput:
        t0 = time.perf_counter_ns()
        context = self.bank.assemble_context()
        t1 = time.perf_counter_ns()
        report = self.backend.segment(frame, payload, self.text_embedding,
                                      context, self.features)
        t2 = time.perf_counter_ns()
        self.bank.update(report)
        memory = self._memory_summary()
        elapsed = (t1 - t0) + (time.perf_counter_ns() - t2)
        return StepOutput(frame=frame, stage_after=self.stage, report=report,
                          memory=memory, policy_time_ns=elapsed)

    def _memory_summary(self) -> dict:
        context = self.bank.assemble_context()
        frames = [e.frame for e in context]
        return {"size": len(frames), "span": max(frames) - min(frames),
                "frames": frames}


@dataclass
class RunRecord:
    """Ordered step outputs plus an end-of-run summary."""

    outputs: list[StepOutput] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def jsonl_records(self) -> list[dict]:
        return [o.to_record() for o in self.outputs]


CSV_HEADER = "frame,stage,iou,occ_prob,mem_size,mem_span,policy_time_ns"


def csv_row(out: StepOutput, include_timing: bool) -> str:
    mem = out.memory or {}
    timing = str(out.policy_time_ns) if include_timing else ""
    return (f"{out.frame},{out.stage_after.value},{out.report.iou_score!r},"
            f"{sigmoid(out.report.occlusion_logit)!r},"
            f"{mem.get('size', 0)},{mem.get('span', 0)},{timing}")


def run_stream(tracker: Tracker, payloads: Iterable[Any]) -> RunRecord:
    """Drive a tracker over a payload stream and summarize the run."""
    record = RunRecord()
    selection: InitialSelection | None = None
    mem_sizes: list[int] = []
    spans: list[int] = []
    times: list[int] = []
    for payload in payloads:
        out = tracker.step(payload)
        record.outputs.append(out)
        times.append(out.policy_time_ns)
        if out.selection is not None:
            selection = out.selection
        if out.memory is not None:
            mem_sizes.append(out.memory["size"])
            spans.append(out.memory["span"])

    summary: dict = {"frames": len(record.outputs)}
    if selection is None:
        summary["initial_frame"] = None
        summary["decided_at"] = None
        summary["transition_latency"] = None
        summary["note"] = "no initial frame"
    else:
        summary["initial_frame"] = selection.frame
        summary["decided_at"] = selection.decided_at
        summary["transition_latency"] = selection.decided_at - selection.frame
    if spans:
        summary["memory_span_final"] = spans[-1]
        summary["memory_span_max"] = max(spans)
        summary["memory_size_mean"] = float(np.mean(mem_sizes))
    summary["policy_time_ns_mean"] = float(np.mean(times)) if times else 0.0
    record.summary = summary
    return record

"""Initial-frame gate: sliding-window qualification and argmax selection.

A frame qualifies when its IoU score and presence probability both clear
their thresholds (strict comparisons). Once the last ``n_w`` observed
frames all qualify, the gate fires exactly once, picking the window frame
with the highest IoU score (earliest frame on ties), then goes inert
until reset. The full score report of every window frame is retained so
the selected frame's prediction can seed a tracker retroactively.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .core import FrameIndex, ScoreReport, TrackerConfig, sigmoid


class GateSequenceError(RuntimeError):
    """Out-of-order frame, or observe() called on an inert gate."""


@dataclass(frozen=True)
class InitialSelection:
    """Result of a gate firing: the chosen frame and when it was chosen."""

    frame: FrameIndex
    report: ScoreReport
    decided_at: FrameIndex


def qualifies(report: ScoreReport, config: TrackerConfig) -> bool:
    """Both scores strictly above their thresholds."""
    return (report.iou_score > config.delta_iou
            and sigmoid(report.occlusion_logit) > config.delta_o)


class InitialFrameGate:
    """Single-owner streaming gate over one score stream."""

    def __init__(self, config: TrackerConfig):
        self.config = config
        self._window: deque[tuple[FrameIndex, bool, float]] = deque()
        self._reports: dict[FrameIndex, ScoreReport] = {}
        self._inert = False

    @property
    def window(self) -> tuple[tuple[FrameIndex, bool, float], ...]:
        return tuple(self._window)

    @property
    def inert(self) -> bool:
        return self._inert

    def observe(self, report: ScoreReport) -> InitialSelection | None:
        """Append one frame; return a selection iff the whole window qualifies."""
        if self._inert:
            raise GateSequenceError(
                "gate already fired; reset() before observing again")
        if self._window and report.frame <= self._window[-1][0]:
            raise GateSequenceError(
                f"frame {report.frame} not after {self._window[-1][0]}")

        self._window.append((report.frame, qualifies(report, self.config),
                             report.iou_score))
        self._reports[report.frame] = report
        if len(self._window) > self.config.n_w:
            evicted, _, _ = self._window.popleft()
            del self._reports[evicted]

        if len(self._window) < self.config.n_w:
            return None
        if not all(q for _, q, _ in self._window):
            return None

        # argmax IoU; max() keeps the first maximum, i.e. the earliest frame
        best_frame, _, _ = max(self._window, key=lambda e: e[2])
        self._inert = True
        return InitialSelection(frame=best_frame,
                                report=self._reports[best_frame],
                                decided_at=report.frame)

    def reset(self) -> None:
        """Clear the window and re-arm; idempotent."""
        self._window.clear()
        self._reports.clear()
        self._inert = False

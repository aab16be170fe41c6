"""Streaming tracking engine with gated initialization and long-term memory."""

__version__ = "0.1.0"

from .core import (FrameIndex, MemoryPolicy, ScoreReport, TrackerConfig,
                   cosine_similarity, sigmoid)
from .gate import InitialFrameGate, InitialSelection, qualifies
from .memory import (CandidatePool, LongTermBank, MemoryBank, MemoryEntry,
                     MemoryKind)
from .tracker import (GateMode, RunRecord, SegmentationBackend, Stage,
                      StepOutput, Tracker, run_stream)

__all__ = [
    "__version__",
    "FrameIndex", "MemoryPolicy", "ScoreReport", "TrackerConfig",
    "cosine_similarity", "sigmoid",
    "InitialFrameGate", "InitialSelection", "qualifies",
    "CandidatePool", "LongTermBank", "MemoryBank", "MemoryEntry", "MemoryKind",
    "GateMode", "RunRecord", "SegmentationBackend", "Stage", "StepOutput",
    "Tracker", "run_stream",
]

"""Memory-bank policies behind one update interface.

Four policies:

* ``vanilla``  - short-term FIFO of the most recent predictions plus the
  permanent initial entry.
* ``extended`` - vanilla with the short-term FIFO enlarged by ``n_l``
  slots; the long-term queue stays unused.
* ``interval`` - vanilla short-term plus a long-term queue fed every
  ``interval_stride`` frames, keeping the ``interval_keep`` most recent
  such pushes.
* ``diverse``  - high-confidence frames (IoU strictly above ``gamma_iou``)
  collect in a bounded candidate pool; when an update finds the pool
  full it first admits the candidate least cosine-similar to the newest
  long-term entry into the long-term queue and clears the pool, then
  offers the current frame.

The initial entry is permanent under every policy and always leads the
assembled context.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, replace
import enum

import numpy as np

from .core import (FrameIndex, MemoryPolicy, ScoreReport, TrackerConfig,
                   cosine_similarity)


class PoolFullError(RuntimeError):
    """offer() on a full candidate pool; drain via select_diverse first."""


class PoolNotFullError(RuntimeError):
    """select_diverse() requires the pool at capacity."""


class MissingEmbeddingError(ValueError):
    """Report lacks the embedding the active policy needs."""


class MemoryKind(enum.Enum):
    INITIAL = "initial"
    SHORT_TERM = "short_term"
    LONG_TERM = "long_term"


@dataclass(frozen=True)
class MemoryEntry:
    """One memory-encoded frame. Embedding must have positive norm."""

    frame: FrameIndex
    embedding: np.ndarray
    iou_score: float
    kind: MemoryKind

    def __post_init__(self) -> None:
        emb = np.asarray(self.embedding, dtype=np.float64)
        object.__setattr__(self, "embedding", emb)
        if emb.ndim != 1 or emb.size == 0:
            raise ValueError("embedding must be a non-empty 1-D vector")
        if float(np.linalg.norm(emb)) == 0.0:
            raise ValueError("memory entries require a nonzero embedding")

    def embedding_hash(self) -> str:
        return hashlib.sha256(
            np.ascontiguousarray(self.embedding).tobytes()).hexdigest()[:12]


def entry_from_report(report: ScoreReport, kind: MemoryKind) -> MemoryEntry:
    if report.embedding is None:
        raise MissingEmbeddingError(
            f"frame {report.frame}: report has no embedding but the memory "
            f"bank stores one per entry")
    return MemoryEntry(frame=report.frame, embedding=report.embedding,
                       iou_score=report.iou_score, kind=kind)


class CandidatePool:
    """Bounded, frame-ordered pool of high-confidence memory candidates."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("pool capacity must be positive")
        self.capacity = capacity
        self.entries: list[MemoryEntry] = []

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def full(self) -> bool:
        return len(self.entries) >= self.capacity

    def offer(self, entry: MemoryEntry, gamma_iou: float) -> bool:
        """Admit ``entry`` iff its IoU is strictly above ``gamma_iou``.

        Returns True when admitted. Offering to a full pool is an error:
        the caller is expected to drain via :meth:`select_diverse` first.
        """
        if self.entries and entry.frame <= self.entries[-1].frame:
            raise ValueError(f"candidate frame {entry.frame} not after "
                             f"{self.entries[-1].frame}")
        if entry.iou_score <= gamma_iou:
            return False
        if self.full:
            raise PoolFullError("candidate pool at capacity; drain it first")
        self.entries.append(entry)
        return True

    def select_diverse(self, latest_long: MemoryEntry) -> MemoryEntry:
        """Pop the candidate least cosine-similar to ``latest_long``.

        Ties go to the lowest frame index. The whole pool is cleared,
        which is what stretches long-term coverage over time.
        """
        if not self.full:
            raise PoolNotFullError(
                f"pool holds {len(self.entries)}/{self.capacity} candidates")
        best = None
        best_sim = np.inf
        for cand in self.entries:  # frame-ordered, so '<' keeps earliest tie
            sim = cosine_similarity(cand.embedding, latest_long.embedding)
            if sim < best_sim:
                best, best_sim = cand, sim
        self.entries = []
        return replace(best, kind=MemoryKind.LONG_TERM)


class LongTermBank:
    """Permanent initial entry plus a FIFO queue of later long-term entries."""

    def __init__(self, initial: MemoryEntry, queue_capacity: int):
        if queue_capacity < 0:
            raise ValueError("queue capacity must be non-negative")
        self.initial = replace(initial, kind=MemoryKind.INITIAL)
        self.queue: deque[MemoryEntry] = deque(maxlen=queue_capacity)

    def push(self, entry: MemoryEntry) -> None:
        newest = self.queue[-1].frame if self.queue else self.initial.frame
        if entry.frame <= newest:
            raise ValueError(f"long-term frame {entry.frame} not after {newest}")
        self.queue.append(entry)  # deque drops the oldest beyond capacity

    def latest(self) -> MemoryEntry:
        """Newest queue entry, or the initial entry while the queue is empty."""
        return self.queue[-1] if self.queue else self.initial

    def entries(self) -> list[MemoryEntry]:
        return [self.initial, *self.queue]


class MemoryBank:
    """Single-owner memory state for one tracked object."""

    def __init__(self, initial_report: ScoreReport, config: TrackerConfig):
        self.config = config
        self.policy = config.policy
        self.short_capacity = config.short_term_capacity
        if self.policy is MemoryPolicy.EXTENDED:
            self.short_capacity += config.n_l
        if self.policy is MemoryPolicy.INTERVAL:
            long_capacity = config.interval_keep
        else:
            long_capacity = config.n_l - 1
        initial = entry_from_report(initial_report, MemoryKind.INITIAL)
        self.long_term = LongTermBank(initial, long_capacity)
        self.short_term: deque[MemoryEntry] = deque(maxlen=self.short_capacity)
        self.pool = CandidatePool(config.n_p)
        self._last_frame = initial.frame

    @property
    def initial(self) -> MemoryEntry:
        return self.long_term.initial

    def update(self, report: ScoreReport) -> None:
        """Fold one tracking-stage report into the bank (policy-dependent)."""
        if report.frame <= self._last_frame:
            raise ValueError(f"update frame {report.frame} not after "
                             f"{self._last_frame}")
        self._last_frame = report.frame
        self.short_term.append(entry_from_report(report, MemoryKind.SHORT_TERM))

        if self.policy in (MemoryPolicy.VANILLA, MemoryPolicy.EXTENDED):
            return
        if self.policy is MemoryPolicy.INTERVAL:
            offset = report.frame - self.initial.frame
            if offset > 0 and offset % self.config.interval_stride == 0:
                self.long_term.push(
                    entry_from_report(report, MemoryKind.LONG_TERM))
            return

        # diverse: drain a full pool before offering the current frame
        if self.pool.full:
            selected = self.pool.select_diverse(self.long_term.latest())
            self.long_term.push(selected)
        self.pool.offer(entry_from_report(report, MemoryKind.LONG_TERM),
                        self.config.gamma_iou)

    def assemble_context(self) -> list[MemoryEntry]:
        """Initial, then long-term oldest-to-newest, then short-term.

        Deduplicated by frame index (first occurrence wins) so no frame
        conditions the backend twice.
        """
        seen: set[FrameIndex] = set()
        context: list[MemoryEntry] = []
        for entry in (*self.long_term.entries(), *self.short_term):
            if entry.frame not in seen:
                seen.add(entry.frame)
                context.append(entry)
        return context

    def span(self) -> int:
        """Frame distance covered by the assembled context."""
        frames = [e.frame for e in self.assemble_context()]
        return max(frames) - min(frames)

    def snapshot(self) -> dict:
        """JSON-ready summary used by run records and coverage analysis."""
        context = self.assemble_context()
        return {
            "policy": self.policy.value,
            "size": len(context),
            "span": self.span(),
            "entries": [
                {"frame": e.frame, "kind": e.kind.value,
                 "iou": float(e.iou_score),
                 "embedding_hash": e.embedding_hash()}
                for e in context
            ],
        }

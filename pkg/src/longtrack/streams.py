"""Stream interchange format: JSON-lines score records with RLE masks.

One record per frame:

    {"frame": int, "iou": float, "occ_logit": float,
     "embedding": [float, ...],
     "mask_rle": [int, ...], "mask_shape": [h, w],
     "gt_mask_rle": [int, ...]}          # optional

``mask_rle`` is a row-major run-length encoding: alternating runs of 0s
and 1s, always starting with the 0-run (possibly of length 0), summing to
h*w. ``mask_shape`` carries the grid dims needed to decode; dims are
constant across one stream.
"""

from __future__ import annotations

import json
from typing import IO, Iterable, Iterator

import numpy as np

from .core import ScoreReport


def mask_to_rle(mask: np.ndarray) -> list[int]:
    """Encode a 2-D binary mask as alternating 0/1 run lengths (0-run first)."""
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError("mask must be 2-D")
    flat = mask.ravel()
    if flat.size == 0:
        return []
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], changes, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return [int(r) for r in runs]


def rle_to_mask(runs: list[int], height: int, width: int) -> np.ndarray:
    """Decode run lengths back to an (height, width) boolean mask."""
    if height < 1 or width < 1:
        raise ValueError("mask dims must be positive")
    total = sum(runs)
    if total != height * width:
        raise ValueError(f"run lengths sum to {total}, expected {height * width}")
    if any(r < 0 for r in runs):
        raise ValueError("run lengths must be non-negative")
    flat = np.zeros(height * width, dtype=bool)
    pos = 0
    value = False
    for r in runs:
        if value:
            flat[pos:pos + r] = True
        pos += r
        value = not value
    return flat.reshape(height, width)


def record_from_report(report: ScoreReport,
                       gt_mask: np.ndarray | None = None) -> dict:
    """Build a JSON-serializable stream record from a score report."""
    if report.mask is None:
        raise ValueError("stream records require a mask")
    if report.embedding is None:
        raise ValueError("stream records require an embedding")
    rec = {
        "frame": report.frame,
        "iou": float(report.iou_score),
        "occ_logit": float(report.occlusion_logit),
        "embedding": [float(v) for v in report.embedding],
        "mask_rle": mask_to_rle(report.mask),
        "mask_shape": [int(report.mask.shape[0]), int(report.mask.shape[1])],
    }
    if gt_mask is not None:
        rec["gt_mask_rle"] = mask_to_rle(gt_mask)
    return rec


def report_from_record(rec: dict) -> tuple[ScoreReport, np.ndarray | None]:
    """Parse a stream record into (report, optional ground-truth mask)."""
    try:
        h, w = rec["mask_shape"]
        report = ScoreReport(
            frame=int(rec["frame"]),
            iou_score=float(rec["iou"]),
            occlusion_logit=float(rec["occ_logit"]),
            embedding=np.asarray(rec["embedding"], dtype=np.float64),
            mask=rle_to_mask(rec["mask_rle"], int(h), int(w)),
        )
    except KeyError as exc:
        raise ValueError(f"stream record missing key {exc}") from exc
    gt = None
    if "gt_mask_rle" in rec:
        gt = rle_to_mask(rec["gt_mask_rle"], int(h), int(w))
    return report, gt


def write_stream(fp: IO[str], records: Iterable[dict]) -> None:
    """Write records as JSON lines (LF-terminated, stable key order)."""
    for rec in records:
        fp.write(json.dumps(rec, separators=(",", ":"), sort_keys=True))
        fp.write("\n")


def read_stream(fp: IO[str]) -> Iterator[dict]:
    """Yield parsed record dicts from a JSON-lines stream."""
    for line in fp:
        line = line.strip()
        if line:
            yield json.loads(line)

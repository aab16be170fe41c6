"""Region (J) and boundary (F) accuracy for binary mask sequences.

Empty-frame convention, applied by both measures: a frame where the
prediction and the ground truth are both empty scores 1 (absence was
tracked correctly); a frame where exactly one is empty scores 0.

Boundary pixels are mask pixels with at least one 4-connected background
neighbor, counting pixels beyond the image border as background. Matching
uses a Euclidean pixel tolerance (default 1 at toy resolutions): a
boundary pixel matches when some counterpart boundary pixel lies within
that radius, implemented as dilation with an exact integer-offset disk.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import ndimage


def _check_pair(pred: np.ndarray, gt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if pred.shape != gt.shape or pred.ndim != 2:
        raise ValueError(f"mask dims differ: {pred.shape} vs {gt.shape}")
    return pred, gt


def frame_iou(pred: np.ndarray, gt: np.ndarray) -> float:
    """Region overlap for one frame, with the empty-frame convention."""
    pred, gt = _check_pair(pred, gt)
    union = int(np.logical_or(pred, gt).sum())
    if union == 0:
        return 1.0
    return int(np.logical_and(pred, gt).sum()) / union


def evaluate_j(preds: Sequence[np.ndarray], gts: Sequence[np.ndarray]) -> float:
    """Mean per-frame region overlap."""
    if len(preds) != len(gts):
        raise ValueError(f"{len(preds)} predictions vs {len(gts)} ground truths")
    if not preds:
        raise ValueError("cannot evaluate an empty sequence")
    return float(np.mean([frame_iou(p, g) for p, g in zip(preds, gts)]))


def boundary_pixels(mask: np.ndarray) -> np.ndarray:
    """Mask pixels with any 4-connected background neighbor or at the border."""
    mask = np.asarray(mask, dtype=bool)
    padded = np.pad(mask, 1)
    interior = (padded[:-2, 1:-1] & padded[2:, 1:-1]
                & padded[1:-1, :-2] & padded[1:-1, 2:])
    return mask & ~interior


def _disk(tolerance: float) -> np.ndarray:
    r = int(np.floor(tolerance))
    di, dj = np.mgrid[-r:r + 1, -r:r + 1]
    return di * di + dj * dj <= tolerance * tolerance


def frame_boundary_f(pred: np.ndarray, gt: np.ndarray,
                     tolerance: float = 1.0) -> float:
    """Boundary F-score for one frame, with the empty-frame convention."""
    pred, gt = _check_pair(pred, gt)
    pred_any, gt_any = bool(pred.any()), bool(gt.any())
    if not pred_any and not gt_any:
        return 1.0
    if pred_any != gt_any:
        return 0.0
    pb = boundary_pixels(pred)
    gb = boundary_pixels(gt)
    disk = _disk(tolerance)
    gb_reach = ndimage.binary_dilation(gb, structure=disk)
    pb_reach = ndimage.binary_dilation(pb, structure=disk)
    precision = int((pb & gb_reach).sum()) / int(pb.sum())
    recall = int((gb & pb_reach).sum()) / int(gb.sum())
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def evaluate_f(preds: Sequence[np.ndarray], gts: Sequence[np.ndarray],
               tolerance: float = 1.0) -> float:
    """Mean per-frame boundary F-score."""
    if len(preds) != len(gts):
        raise ValueError(f"{len(preds)} predictions vs {len(gts)} ground truths")
    if not preds:
        raise ValueError("cannot evaluate an empty sequence")
    return float(np.mean([frame_boundary_f(p, g, tolerance)
                          for p, g in zip(preds, gts)]))


def jf_mean(j: float, f: float) -> float:
    """Arithmetic mean of the two accuracy measures."""
    for name, v in (("j", j), ("f", f)):
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"{name} must be in [0, 1], got {v}")
    return (j + f) / 2.0

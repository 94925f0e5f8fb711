"""Pixel-wise Jaccard index for the vegetation classes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

__all__ = [
    "SEG_CLASSES",
    "REPORTED_CLASSES",
    "IGNORE_LABEL",
    "LabelMask",
    "ConfusionMatrix",
    "SegmentationScores",
    "accumulate",
    "class_iou",
    "evaluate_masks",
]

SEG_CLASSES = ("background", "low_vegetation", "high_vegetation")
REPORTED_CLASSES = ("low_vegetation", "high_vegetation")
IGNORE_LABEL = 255


@dataclass(frozen=True, eq=False)
class LabelMask:
    labels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 2:
            raise ValueError(f"label mask must be 2-D, got shape {arr.shape}")
        object.__setattr__(self, "labels", arr.astype(np.uint8, copy=False))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Pixel counts indexed ``[gt_class, pred_class]``, ignore pixels excluded."""

    counts: np.ndarray

    @classmethod
    def empty(cls) -> "ConfusionMatrix":
        return cls(np.zeros((len(SEG_CLASSES),) * 2, dtype=np.int64))

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def accumulate(
    gt: LabelMask, pred: LabelMask, acc: Optional[ConfusionMatrix] = None,
    ignore_label: int = IGNORE_LABEL,
) -> ConfusionMatrix:
    """Add the (gt, pred) pixel pairs of one image to ``acc``."""
    if gt.labels.shape != pred.labels.shape:
        raise ValueError(
            f"mask size mismatch: gt {gt.width}x{gt.height}, pred {pred.width}x{pred.height}"
        )
    n = len(SEG_CLASSES)
    p = pred.labels.ravel()
    if p.size and int(p.max()) >= n:
        raise ValueError(f"prediction contains label ids outside 0..{n - 1}")
    g = gt.labels.ravel()
    keep = g != ignore_label
    g, p = g[keep].astype(np.int64), p[keep].astype(np.int64)
    if g.size and int(g.max()) >= n:
        raise ValueError(f"ground truth contains label ids outside 0..{n - 1} and {ignore_label}")
    counts = np.bincount(g * n + p, minlength=n * n).reshape(n, n)
    base = ConfusionMatrix.empty() if acc is None else acc
    return base + ConfusionMatrix(counts)


@dataclass(frozen=True)
class SegmentationScores:
    per_class: dict
    mean: Optional[float]


def class_iou(acc: ConfusionMatrix) -> SegmentationScores:
    """Per-class IoU; classes absent from both GT and prediction get None.

    The mean covers the vegetation classes only.
    """
    c = acc.counts.astype(np.float64)
    diag = np.diag(c)
    union = c.sum(axis=1) + c.sum(axis=0) - diag
    per_class = {
        name: (float(diag[i] / union[i]) if union[i] > 0 else None)
        for i, name in enumerate(SEG_CLASSES)
    }
    present = [per_class[k] for k in REPORTED_CLASSES if per_class[k] is not None]
    return SegmentationScores(per_class, float(np.mean(present)) if present else None)


def evaluate_masks(
    pairs: Iterable[tuple[LabelMask, LabelMask]], ignore_label: int = IGNORE_LABEL
) -> SegmentationScores:
    acc = ConfusionMatrix.empty()
    for gt, pred in pairs:
        acc = accumulate(gt, pred, acc, ignore_label)
    return class_iou(acc)

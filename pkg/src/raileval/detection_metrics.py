"""COCO-style box mAP with crowd/ignore handling and difficulty levels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Optional, Sequence

import numpy as np

from ._parallel import ordered_map
from .ap_core import APResult, MetricRow, ap_from_units

__all__ = [
    "CLASSES",
    "GtBox",
    "PredBox",
    "Difficulty",
    "DEFAULT_DIFFICULTIES",
    "COCO_IOU_THRESHOLDS",
    "DetectionFrame",
    "DetectionSummary",
    "iou_matrix",
    "intersection_over_pred_area",
    "evaluate_class",
    "map_summary",
]

CLASSES = (
    "train",
    "person",
    "road_vehicle",
    "bicycle",
    "signal",
    "signal_pole",
    "catenary_pole",
)

COCO_IOU_THRESHOLDS = tuple((50 + 5 * i) / 100 for i in range(10))


def _check_box(w, h, where):
    if not (w > 0 and h > 0):
        raise ValueError(f"{where}: box width and height must be > 0")


@dataclass(frozen=True)
class GtBox:
    class_label: str
    x: float
    y: float
    w: float
    h: float
    occlusion: float = 0.0
    iscrowd: bool = False
    ignore: bool = False

    def __post_init__(self):
        if self.class_label not in CLASSES:
            raise ValueError(f"unknown class label {self.class_label!r}")
        _check_box(self.w, self.h, "gt box")
        if not 0.0 <= self.occlusion <= 1.0:
            raise ValueError("occlusion must lie in [0, 1]")

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def xywh(self):
        return (self.x, self.y, self.w, self.h)


@dataclass(frozen=True)
class PredBox:
    class_label: str
    x: float
    y: float
    w: float
    h: float
    score: float = 1.0

    def __post_init__(self):
        if self.class_label not in CLASSES:
            raise ValueError(f"unknown class label {self.class_label!r}")
        _check_box(self.w, self.h, "predicted box")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError("score must lie in [0, 1]")

    @property
    def xywh(self):
        return (self.x, self.y, self.w, self.h)


@dataclass(frozen=True)
class Difficulty:
    """Ground-truth gate: boxes outside it are neutral rather than missed.

    A box counts when ``area >= min_area`` and its occlusion is below
    ``max_occlusion`` (or equal to it when ``inclusive``). Fully occluded
    boxes never count.
    """

    name: str
    min_area: float
    max_occlusion: float
    inclusive: bool = False

    def admits(self, box: GtBox) -> bool:
        if box.occlusion >= 1.0 or box.area < self.min_area:
            return False
        if self.inclusive:
            return box.occlusion <= self.max_occlusion
        return box.occlusion < self.max_occlusion

    def to_dict(self) -> dict:
        return {
            "min_area": self.min_area,
            "max_occlusion": self.max_occlusion,
            "inclusive": self.inclusive,
        }


DEFAULT_DIFFICULTIES = (
    Difficulty("easy", 2500.0, 0.25),
    # no agreed definition exists for moderate; this gate is a placeholder
    Difficulty("moderate", 625.0, 0.50),
    Difficulty("hard", 0.0, 0.99, inclusive=True),
)


def check_nested(difficulties: Sequence[Difficulty]) -> None:
    """Reject gate lists where a later level does not contain the earlier one."""
    for a, b in zip(difficulties, difficulties[1:]):
        looser_occ = b.max_occlusion > a.max_occlusion or (
            b.max_occlusion == a.max_occlusion and (b.inclusive or not a.inclusive)
        )
        if b.min_area > a.min_area or not looser_occ:
            raise ValueError(f"difficulty {b.name!r} must contain {a.name!r}")


@dataclass(frozen=True, eq=False)
class DetectionFrame:
    frame_id: Hashable
    gt_boxes: tuple = ()
    pred_boxes: tuple = ()
    image_width: Optional[float] = None
    image_height: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "gt_boxes", tuple(self.gt_boxes))
        object.__setattr__(self, "pred_boxes", tuple(self.pred_boxes))


def _xyxy(boxes) -> np.ndarray:
    a = np.asarray([b.xywh if hasattr(b, "xywh") else b for b in boxes], dtype=np.float64)
    a = a.reshape(-1, 4)
    return np.column_stack([a[:, 0], a[:, 1], a[:, 0] + a[:, 2], a[:, 1] + a[:, 3]])


def _intersections(p: np.ndarray, g: np.ndarray) -> np.ndarray:
    iw = np.minimum(p[:, None, 2], g[None, :, 2]) - np.maximum(p[:, None, 0], g[None, :, 0])
    ih = np.minimum(p[:, None, 3], g[None, :, 3]) - np.maximum(p[:, None, 1], g[None, :, 1])
    return np.clip(iw, 0, None) * np.clip(ih, 0, None)


def _areas(b: np.ndarray) -> np.ndarray:
    return (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])


def iou_matrix(preds, gts) -> np.ndarray:
    p, g = _xyxy(preds), _xyxy(gts)
    inter = _intersections(p, g)
    union = _areas(p)[:, None] + _areas(g)[None, :] - inter
    return np.where(union > 0, inter / np.where(union > 0, union, 1.0), 0.0)


def intersection_over_pred_area(preds, gts) -> np.ndarray:
    p, g = _xyxy(preds), _xyxy(gts)
    area = _areas(p)[:, None]
    return np.where(area > 0, _intersections(p, g) / np.where(area > 0, area, 1.0), 0.0)


@dataclass(frozen=True, eq=False)
class _ClassFrame:
    """Score-sorted predictions and overlaps of one class in one frame."""

    gts: tuple
    scores: tuple
    iou: np.ndarray
    overlap: np.ndarray
    crowd: np.ndarray

    @classmethod
    def build(cls, frame: DetectionFrame, label: str) -> "_ClassFrame":
        gts = tuple(g for g in frame.gt_boxes if g.class_label == label)
        preds = sorted(
            (p for p in frame.pred_boxes if p.class_label == label), key=lambda p: -p.score
        )
        crowd = np.array([g.iscrowd for g in gts], dtype=bool)
        if preds and gts:
            iou = iou_matrix(preds, gts)
            # crowd regions absorb any prediction that lies mostly inside them
            overlap = np.where(crowd[None, :], intersection_over_pred_area(preds, gts), iou)
        else:
            iou = overlap = np.zeros((len(preds), len(gts)))
        return cls(gts, tuple(p.score for p in preds), iou, overlap, crowd)


def _match_units(cf: _ClassFrame, thr: float, difficulty: Difficulty):
    counted = np.array(
        [difficulty.admits(g) and not g.ignore and not g.iscrowd for g in cf.gts], dtype=bool
    )
    n_counted = int(counted.sum())
    if not cf.gts:
        return [(s, False) for s in cf.scores], 0
    crowd = cf.crowd
    taken = np.zeros(len(cf.gts), dtype=bool)
    units = []
    for i, score in enumerate(cf.scores):
        ok = counted & ~taken & (cf.iou[i] >= thr)
        if ok.any():
            j = int(np.argmax(np.where(ok, cf.iou[i], -1.0)))
            taken[j] = True
            units.append((score, True))
            continue
        neutral = ~counted & ~(taken & ~crowd) & (cf.overlap[i] >= thr)
        if neutral.any():
            j = int(np.argmax(np.where(neutral, cf.overlap[i], -1.0)))
            if not crowd[j]:
                taken[j] = True
            continue
        units.append((score, False))
    return units, n_counted


def _frame_units(frame: DetectionFrame, label: str, thr: float, difficulty: Difficulty):
    return _match_units(_ClassFrame.build(frame, label), thr, difficulty)


def _class_ap(prepared, label, thr, difficulty, workers) -> APResult:
    parts = ordered_map(lambda cf: _match_units(cf, thr, difficulty), prepared, workers)
    units = [u for us, _ in parts for u in us]
    return ap_from_units(units, sum(n for _, n in parts), thr, f"AP[{label}]")


def evaluate_class(
    frames: Sequence[DetectionFrame],
    class_label: str,
    iou_threshold: float,
    difficulty: Difficulty,
    workers: int = 1,
) -> APResult:
    """AP of one class at one IoU threshold and difficulty level.

    Per frame, predictions are visited by descending score and take the
    highest-IoU free counted GT box. Failing that, a prediction that hits a
    neutral box (ignored, crowd, or outside the difficulty gate) is dropped
    from scoring instead of being counted as a false positive.
    """
    if not 0.5 <= iou_threshold <= 0.95:
        raise ValueError("iou_threshold must lie in [0.5, 0.95]")
    if class_label not in CLASSES:
        raise ValueError(f"unknown class label {class_label!r}")
    prepared = ordered_map(lambda f: _ClassFrame.build(f, class_label), frames, workers)
    return _class_ap(prepared, class_label, iou_threshold, difficulty, workers)


@dataclass(frozen=True)
class DetectionSummary:
    map_by_difficulty: dict
    ap50_per_class: dict
    difficulties: tuple = field(default=DEFAULT_DIFFICULTIES)

    def rows(self) -> list[MetricRow]:
        out = [MetricRow("mAP@[.50:.95]", d, v) for d, v in self.map_by_difficulty.items()]
        out += [MetricRow(f"AP@50[{c}]", self.difficulties[-1].name, v)
                for c, v in self.ap50_per_class.items()]
        return out


def _counted_total(frames, label, difficulty) -> int:
    return sum(
        1
        for f in frames
        for g in f.gt_boxes
        if g.class_label == label and difficulty.admits(g) and not g.ignore and not g.iscrowd
    )


def map_summary(
    frames: Sequence[DetectionFrame],
    difficulties: Sequence[Difficulty] = DEFAULT_DIFFICULTIES,
    iou_thresholds: Sequence[float] = COCO_IOU_THRESHOLDS,
    workers: int = 1,
) -> DetectionSummary:
    """mAP@[.50:.95] per difficulty plus per-class AP@50 at the loosest level.

    Classes without counted ground truth at a level are left out of that
    level's mean; a level with no such class at all reports None.
    """
    difficulties = tuple(difficulties)
    check_nested(difficulties)
    iou_thresholds = tuple(iou_thresholds)
    if not iou_thresholds or any(not 0.5 <= t <= 0.95 for t in iou_thresholds):
        raise ValueError("iou_thresholds must lie in [0.5, 0.95]")
    prepared = {
        c: ordered_map(lambda f, c=c: _ClassFrame.build(f, c), frames, workers) for c in CLASSES
    }
    maps = {}
    for d in difficulties:
        per_class = []
        for c in CLASSES:
            if _counted_total(frames, c, d) == 0:
                continue
            aps = [_class_ap(prepared[c], c, t, d, workers).ap for t in iou_thresholds]
            per_class.append(float(np.mean(aps)))
        maps[d.name] = float(np.mean(per_class)) if per_class else None
    last = difficulties[-1]
    ap50 = {
        c: (_class_ap(prepared[c], c, 0.5, last, workers).ap
            if _counted_total(frames, c, last) else None)
        for c in CLASSES
    }
    return DetectionSummary(maps, ap50, difficulties)

"""Evaluation metrics for railway perception benchmarks.

Polyline metrics (LineAP, ChamferAP, TuSimple, CULane F1), COCO-style box
mAP with difficulty levels, and vegetation segmentation IoU.
"""

__version__ = "0.1.0"

from .ap_core import (  # noqa: E402
    APResult,
    MatchCandidate,
    PRPoint,
    average_precision,
    greedy_match,
    min_weight_max_matching,
    pr_curve,
)
from .detection_metrics import Difficulty, GtBox, PredBox, evaluate_class, map_summary  # noqa: E402
from .geometry import Polygon, Polyline  # noqa: E402
from .line_metrics import (  # noqa: E402
    LineEvalConfig,
    LineEvalFrame,
    chamfer_ap,
    chamfer_distance,
    culane_f1,
    line_ap,
    tusimple_accuracy,
)
from .segmentation_metrics import ConfusionMatrix, LabelMask, accumulate, class_iou  # noqa: E402

__all__ = [
    "APResult", "MatchCandidate", "PRPoint", "average_precision", "greedy_match",
    "min_weight_max_matching", "pr_curve",
    "Difficulty", "GtBox", "PredBox", "evaluate_class", "map_summary",
    "Polygon", "Polyline",
    "LineEvalConfig", "LineEvalFrame", "chamfer_ap", "chamfer_distance", "culane_f1",
    "line_ap", "tusimple_accuracy",
    "ConfusionMatrix", "LabelMask", "accumulate", "class_iou",
]

"""Reading, validating and writing ground-truth and prediction files.

Files are UTF-8 JSON Lines: a header object followed by one object per frame.
The field reference lives in ``docs/FORMATS.md``. Every rejection raises
:class:`FormatError` carrying the frame id and the offending field path; a
load either returns a fully validated set or raises.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Any, Hashable, Iterator, Optional, Union

import numpy as np
from PIL import Image

from .detection_metrics import CLASSES, DetectionFrame, GtBox, PredBox
from .geometry import GeometryError, Polygon, Polyline
from .line_metrics import LineEvalFrame
from .segmentation_metrics import LabelMask

__all__ = [
    "SCHEMA_VERSION",
    "CHALLENGES",
    "CLAMP_TOLERANCE_PX",
    "OCCLUSION_BINS",
    "FormatError",
    "PairingError",
    "RailFrame",
    "ObjectFrame",
    "VegetationFrame",
    "RailPrediction",
    "ObjectPrediction",
    "VegetationPrediction",
    "EvalSet",
    "PredictionSet",
    "load_ground_truth",
    "load_predictions",
    "loads_ground_truth",
    "loads_predictions",
    "dumps_ground_truth",
    "dumps_predictions",
    "validate_pairing",
    "read_mask",
    "rail_eval_frames",
    "object_eval_frames",
    "vegetation_mask_pairs",
]

SCHEMA_VERSION = "1.0"
CHALLENGES = ("rail", "object", "vegetation")
CLAMP_TOLERANCE_PX = 2.0
OCCLUSION_BINS = {0: 0.0, 25: 0.25, 50: 0.50, 75: 0.75, 99: 0.99, 100: 1.0}
HEADER_ID = "<header>"

PathLike = Union[str, Path]


class FormatError(ValueError):
    """A file violates the format; ``frame_id`` and ``field`` locate the problem."""

    def __init__(self, message: str, frame_id: Hashable = None, field: str = "",
                 line: Optional[int] = None, source: Optional[str] = None):
        if frame_id is None and line is not None:
            # records without a usable id are located by their line
            frame_id = f"<line {line}>"
        self.frame_id = frame_id
        self.field = field
        self.line = line
        self.source = source
        self.reason = message
        where = f"{source or '<string>'}" + (f":{line}" if line is not None else "")
        fid = "<unknown>" if frame_id is None else frame_id
        loc = f"frame {fid!r}" + (f": {field}" if field else "")
        super().__init__(f"{where}: {loc}: {message}")


class PairingError(ValueError):
    """Ground truth and predictions cannot be evaluated together."""


# ------------------------------------------------------------------ data model


@dataclass(frozen=True, eq=False)
class RailFrame:
    frame_id: str
    width: float
    height: float
    rails: tuple = ()
    ignore_regions: tuple = ()


@dataclass(frozen=True, eq=False)
class ObjectFrame:
    frame_id: str
    width: float
    height: float
    boxes: tuple = ()


@dataclass(frozen=True, eq=False)
class VegetationFrame:
    frame_id: str
    width: int
    height: int
    mask: str
    mask_path: Optional[Path] = None


@dataclass(frozen=True, eq=False)
class RailPrediction:
    frame_id: str
    rails: tuple = ()


@dataclass(frozen=True, eq=False)
class ObjectPrediction:
    frame_id: str
    boxes: tuple = ()


@dataclass(frozen=True, eq=False)
class VegetationPrediction:
    frame_id: str
    mask: str
    mask_path: Optional[Path] = None


@dataclass(frozen=True, eq=False)
class EvalSet:
    challenge: str
    frames: dict
    schema_version: str = SCHEMA_VERSION
    warnings: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "frames", MappingProxyType(dict(self.frames)))


@dataclass(frozen=True, eq=False)
class PredictionSet:
    challenge: str
    frames: dict
    schema_version: str = SCHEMA_VERSION
    warnings: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "frames", MappingProxyType(dict(self.frames)))

    def get(self, frame_id: str):
        return self.frames.get(frame_id)


# --------------------------------------------------------------------- parsing


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


class _Ctx:
    """Location bookkeeping for one record being parsed."""

    def __init__(self, source, line, frame_id=None, warnings=None):
        self.source = source
        self.line = line
        self.frame_id = frame_id
        self.warnings = warnings if warnings is not None else []

    def fail(self, field, message):
        raise FormatError(message, self.frame_id, field, self.line, self.source)

    def warn(self, field, message):
        self.warnings.append(f"frame {self.frame_id!r}: {field}: {message}")


def _iter_records(text: str, source: str) -> Iterator[tuple[int, Any]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw, parse_constant=_reject_constant)
        except ValueError as exc:
            m = re.search(r'"frame_id"\s*:\s*"([^"]*)"', raw)
            fid = m.group(1) if m else (HEADER_ID if lineno == 1 else None)
            raise FormatError(f"invalid JSON ({exc})", fid, "<record>", lineno, source) from None
        yield lineno, obj


def _require(ctx: _Ctx, obj: dict, key: str, kinds, field: str):
    if key not in obj:
        ctx.fail(field, "missing required field")
    value = obj[key]
    if not isinstance(value, kinds) or isinstance(value, bool) and bool not in _as_tuple(kinds):
        ctx.fail(field, f"expected {_kind_name(kinds)}, got {type(value).__name__}")
    return value


def _as_tuple(kinds):
    return kinds if isinstance(kinds, tuple) else (kinds,)


def _kind_name(kinds):
    names = {int: "integer", float: "number", str: "string", list: "array", dict: "object",
             bool: "boolean"}
    return " or ".join(names.get(k, k.__name__) for k in _as_tuple(kinds))


def _number(ctx, obj, key, field, *, positive=False, optional=False, default=None):
    if optional and key not in obj:
        return default
    value = _require(ctx, obj, key, (int, float), field)
    value = float(value)
    if not math.isfinite(value):
        ctx.fail(field, "must be finite")
    if positive and not value > 0:
        ctx.fail(field, f"must be > 0, got {value:g}")
    return value


def _check_keys(ctx, obj, allowed, field):
    extra = sorted(set(obj) - set(allowed))
    if extra:
        ctx.fail(f"{field}.{extra[0]}" if field else extra[0], "unknown field")


def _parse_header(text: str, source: str, expected_kind: str) -> tuple[dict, Iterator]:
    records = _iter_records(text, source)
    try:
        lineno, header = next(records)
    except StopIteration:
        raise FormatError("empty file: header record required", HEADER_ID, "", None, source)
    ctx = _Ctx(source, lineno, HEADER_ID)
    if not isinstance(header, dict):
        ctx.fail("", "header must be a JSON object")
    _check_keys(ctx, header, ("schema_version", "challenge", "kind"), "")
    version = _require(ctx, header, "schema_version", str, "schema_version")
    if version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        ctx.fail("schema_version", f"unsupported schema version {version!r}")
    challenge = _require(ctx, header, "challenge", str, "challenge")
    if challenge not in CHALLENGES:
        ctx.fail("challenge", f"unknown challenge {challenge!r}; expected one of {CHALLENGES}")
    kind = _require(ctx, header, "kind", str, "kind")
    if kind != expected_kind:
        ctx.fail("kind", f"expected {expected_kind!r} file, got {kind!r}")
    return {"schema_version": version, "challenge": challenge}, records


def _clamp_points(ctx, pts: np.ndarray, width, height, field) -> np.ndarray:
    lo = np.array([0.0, 0.0])
    hi = np.array([width, height])
    below = pts < lo - CLAMP_TOLERANCE_PX
    above = pts > hi + CLAMP_TOLERANCE_PX
    if below.any() or above.any():
        i = int(np.flatnonzero((below | above).any(axis=1))[0])
        ctx.fail(f"{field}[{i}]", f"point {pts[i].tolist()} lies outside the "
                 f"{width:g}x{height:g} image by more than {CLAMP_TOLERANCE_PX:g} px")
    clamped = np.clip(pts, lo, hi)
    moved = np.flatnonzero((clamped != pts).any(axis=1))
    if len(moved):
        ctx.warn(field, f"{len(moved)} point(s) clamped to image bounds")
    return clamped


def _parse_points(ctx, obj, field, width, height, min_points, shape) -> np.ndarray:
    if "points" not in obj:
        ctx.fail(f"{field}.points", "missing required field")
    raw = obj["points"]
    pfield = f"{field}.points"
    if not isinstance(raw, list):
        ctx.fail(pfield, "expected an array of [x, y] pairs")
    for i, p in enumerate(raw):
        if (not isinstance(p, list) or len(p) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in p)):
            ctx.fail(f"{pfield}[{i}]", "expected [x, y] with numeric coordinates")
    pts = np.asarray(raw, dtype=np.float64).reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        ctx.fail(pfield, "coordinates must be finite")
    if len(pts) < min_points:
        ctx.fail(pfield, f"{shape} requires >= {min_points} points, got {len(pts)}")
    return _clamp_points(ctx, pts, width, height, pfield)


def _parse_polyline(ctx, obj, field, width, height, scored) -> Polyline:
    if not isinstance(obj, dict):
        ctx.fail(field, "expected an object")
    allowed = ("points", "score") if scored else ("points",)
    _check_keys(ctx, obj, allowed, field)
    pts = _parse_points(ctx, obj, field, width, height, 2, "polyline")
    score = None
    if scored:
        score = _number(ctx, obj, "score", f"{field}.score", optional=True)
        if score is None:
            score = 1.0
            ctx.warn(f"{field}.score", "missing; defaulted to 1.0")
        elif not 0.0 <= score <= 1.0:
            ctx.fail(f"{field}.score", f"score {score:g} outside [0, 1]")
    try:
        return Polyline.from_points(pts, score)
    except GeometryError as exc:
        ctx.fail(f"{field}.points", str(exc))


def _parse_polygon(ctx, obj, field, width, height) -> Polygon:
    if not isinstance(obj, dict):
        ctx.fail(field, "expected an object")
    _check_keys(ctx, obj, ("points",), field)
    pts = _parse_points(ctx, obj, field, width, height, 3, "polygon")
    try:
        return Polygon.from_points(pts)
    except GeometryError as exc:
        ctx.fail(f"{field}.points", str(exc))


def _parse_list(ctx, obj, key, optional=True):
    if key not in obj:
        if optional:
            return []
        ctx.fail(key, "missing required field")
    value = obj[key]
    if not isinstance(value, list):
        ctx.fail(key, "expected an array")
    return value


def _parse_bbox(ctx, obj, field, width, height):
    raw = obj.get("bbox")
    if raw is None:
        ctx.fail(f"{field}.bbox", "missing required field")
    if (not isinstance(raw, list) or len(raw) != 4
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)):
        ctx.fail(f"{field}.bbox", "expected [x, y, w, h] numbers")
    x, y, w, h = (float(v) for v in raw)
    if not all(math.isfinite(v) for v in (x, y, w, h)):
        ctx.fail(f"{field}.bbox", "coordinates must be finite")
    if not (w > 0 and h > 0):
        ctx.fail(f"{field}.bbox", f"box extent must be positive, got w={w:g} h={h:g}")
    corners = _clamp_points(ctx, np.array([[x, y], [x + w, y + h]]), width, height, f"{field}.bbox")
    (x0, y0), (x1, y1) = corners
    if not (x1 > x0 and y1 > y0):
        ctx.fail(f"{field}.bbox", "box has no extent inside the image")
    return x0, y0, x1 - x0, y1 - y0


def _parse_label(ctx, obj, field):
    label = _require(ctx, obj, "label", str, f"{field}.label")
    if label not in CLASSES:
        ctx.fail(f"{field}.label", f"unknown class label {label!r}")
    return label


def _parse_gt_box(ctx, obj, field, width, height) -> GtBox:
    if not isinstance(obj, dict):
        ctx.fail(field, "expected an object")
    _check_keys(ctx, obj, ("label", "bbox", "occlusion", "occlusion_bin", "iscrowd", "ignore"),
                field)
    label = _parse_label(ctx, obj, field)
    x, y, w, h = _parse_bbox(ctx, obj, field, width, height)
    if "occlusion" in obj and "occlusion_bin" in obj:
        ctx.fail(f"{field}.occlusion", "give either occlusion or occlusion_bin, not both")
    if "occlusion_bin" in obj:
        b = obj["occlusion_bin"]
        if isinstance(b, bool) or not isinstance(b, (int, float)) or b not in OCCLUSION_BINS:
            ctx.fail(f"{field}.occlusion_bin", f"expected one of {sorted(OCCLUSION_BINS)}")
        occ = OCCLUSION_BINS[int(b)]
    else:
        occ = _number(ctx, obj, "occlusion", f"{field}.occlusion", optional=True, default=0.0)
        if not 0.0 <= occ <= 1.0:
            ctx.fail(f"{field}.occlusion", f"occlusion {occ:g} outside [0, 1]")
    flags = {}
    for key in ("iscrowd", "ignore"):
        v = obj.get(key, False)
        if not isinstance(v, bool):
            ctx.fail(f"{field}.{key}", "expected boolean")
        flags[key] = v
    return GtBox(label, x, y, w, h, occ, flags["iscrowd"], flags["ignore"])


def _parse_pred_box(ctx, obj, field, width, height) -> PredBox:
    if not isinstance(obj, dict):
        ctx.fail(field, "expected an object")
    _check_keys(ctx, obj, ("label", "bbox", "score"), field)
    label = _parse_label(ctx, obj, field)
    x, y, w, h = _parse_bbox(ctx, obj, field, width, height)
    score = _number(ctx, obj, "score", f"{field}.score", optional=True)
    if score is None:
        score = 1.0
        ctx.warn(f"{field}.score", "missing; defaulted to 1.0")
    elif not 0.0 <= score <= 1.0:
        ctx.fail(f"{field}.score", f"score {score:g} outside [0, 1]")
    return PredBox(label, x, y, w, h, score)


def _resolve_mask(ctx, obj, base: Optional[Path], width=None, height=None) -> tuple[str, Path]:
    rel = _require(ctx, obj, "mask", str, "mask")
    path = (base / rel) if base is not None else Path(rel)
    try:
        with Image.open(path) as img:
            mode, size = img.mode, img.size
    except FileNotFoundError:
        ctx.fail("mask", f"mask file not found: {rel}")
    except OSError as exc:
        ctx.fail("mask", f"unreadable mask {rel}: {exc}")
    if mode not in ("L", "P"):
        ctx.fail("mask", f"mask must be 8-bit single-channel, got PIL mode {mode!r}")
    if width is not None and size != (width, height):
        ctx.fail("mask", f"mask is {size[0]}x{size[1]}, frame is {width}x{height}")
    return rel, path


def _frame_header(ctx, obj, seen, known=None):
    if not isinstance(obj, dict):
        ctx.fail("", "frame record must be a JSON object")
    fid = obj.get("frame_id")
    if not isinstance(fid, str) or not fid:
        ctx.fail("frame_id", "missing or non-string frame_id")
    ctx.frame_id = fid
    if fid in seen:
        ctx.fail("frame_id", f"duplicate frame id {fid!r}")
    if known is not None and fid not in known:
        ctx.fail("frame_id", f"unknown frame id {fid!r} (not in ground truth)")
    seen.add(fid)
    return fid


def _dims(ctx, obj, integral=False):
    w = _number(ctx, obj, "width", "width", positive=True)
    h = _number(ctx, obj, "height", "height", positive=True)
    if integral and (w != int(w) or h != int(h)):
        ctx.fail("width", "mask frames need integer dimensions")
    return (int(w), int(h)) if integral else (w, h)


_GT_KEYS = {
    "rail": ("frame_id", "width", "height", "rails", "ignore_regions"),
    "object": ("frame_id", "width", "height", "boxes"),
    "vegetation": ("frame_id", "width", "height", "mask"),
}
_PRED_KEYS = {
    "rail": ("frame_id", "rails"),
    "object": ("frame_id", "boxes"),
    "vegetation": ("frame_id", "mask"),
}


def _gt_frame(ctx, challenge, obj, base):
    _check_keys(ctx, obj, _GT_KEYS[challenge], "")
    if challenge == "vegetation":
        w, h = _dims(ctx, obj, integral=True)
        rel, path = _resolve_mask(ctx, obj, base, w, h)
        return VegetationFrame(ctx.frame_id, w, h, rel, path)
    w, h = _dims(ctx, obj)
    if challenge == "rail":
        rails = tuple(_parse_polyline(ctx, r, f"rails[{i}]", w, h, scored=False)
                      for i, r in enumerate(_parse_list(ctx, obj, "rails")))
        regions = tuple(_parse_polygon(ctx, r, f"ignore_regions[{i}]", w, h)
                        for i, r in enumerate(_parse_list(ctx, obj, "ignore_regions")))
        return RailFrame(ctx.frame_id, w, h, rails, regions)
    boxes = tuple(_parse_gt_box(ctx, b, f"boxes[{i}]", w, h)
                  for i, b in enumerate(_parse_list(ctx, obj, "boxes")))
    return ObjectFrame(ctx.frame_id, w, h, boxes)


def _pred_frame(ctx, challenge, obj, gt_frame, base):
    _check_keys(ctx, obj, _PRED_KEYS[challenge], "")
    if challenge == "vegetation":
        rel, path = _resolve_mask(ctx, obj, base, gt_frame.width, gt_frame.height)
        return VegetationPrediction(ctx.frame_id, rel, path)
    w, h = gt_frame.width, gt_frame.height
    if challenge == "rail":
        rails = tuple(_parse_polyline(ctx, r, f"rails[{i}]", w, h, scored=True)
                      for i, r in enumerate(_parse_list(ctx, obj, "rails")))
        return RailPrediction(ctx.frame_id, rails)
    boxes = tuple(_parse_pred_box(ctx, b, f"boxes[{i}]", w, h)
                  for i, b in enumerate(_parse_list(ctx, obj, "boxes")))
    return ObjectPrediction(ctx.frame_id, boxes)


def loads_ground_truth(text: str, challenge: Optional[str] = None, source: str = "<string>",
                       base_dir: Optional[PathLike] = None) -> EvalSet:
    header, records = _parse_header(text, source, "ground_truth")
    if challenge is not None and header["challenge"] != challenge:
        raise FormatError(f"file holds {header['challenge']!r} ground truth, expected "
                          f"{challenge!r}", HEADER_ID, "challenge", 1, source)
    base = Path(base_dir) if base_dir is not None else None
    warnings: list[str] = []
    frames: dict = {}
    seen: set = set()
    for lineno, obj in records:
        ctx = _Ctx(source, lineno, warnings=warnings)
        fid = _frame_header(ctx, obj, seen)
        frames[fid] = _gt_frame(ctx, header["challenge"], obj, base)
    return EvalSet(header["challenge"], frames, header["schema_version"], tuple(warnings))


def loads_predictions(text: str, eval_set: EvalSet, source: str = "<string>",
                      base_dir: Optional[PathLike] = None) -> PredictionSet:
    header, records = _parse_header(text, source, "predictions")
    base = Path(base_dir) if base_dir is not None else None
    warnings: list[str] = []
    frames: dict = {}
    seen: set = set()
    for lineno, obj in records:
        ctx = _Ctx(source, lineno, warnings=warnings)
        fid = _frame_header(ctx, obj, seen, eval_set.frames.keys()
                            if header["challenge"] == eval_set.challenge else None)
        if header["challenge"] != eval_set.challenge:
            # reported by validate_pairing; geometry cannot be checked against foreign frames
            continue
        frames[fid] = _pred_frame(ctx, header["challenge"], obj, eval_set.frames[fid], base)
    return PredictionSet(header["challenge"], frames, header["schema_version"], tuple(warnings))


def _read_text(path: Path) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def load_ground_truth(path: PathLike, challenge: Optional[str] = None) -> EvalSet:
    """Load and validate a ground-truth file. Mask paths resolve against its directory."""
    path = Path(path)
    return loads_ground_truth(_read_text(path), challenge, str(path), path.parent)


def load_predictions(path: PathLike, eval_set: EvalSet) -> PredictionSet:
    """Load predictions and validate them against the paired ground truth."""
    path = Path(path)
    return loads_predictions(_read_text(path), eval_set, str(path), path.parent)


def validate_pairing(eval_set: EvalSet, pred_set: PredictionSet) -> list[str]:
    """Cross-check a loaded pair and return warnings. Challenge mismatch is fatal."""
    if eval_set.challenge != pred_set.challenge:
        raise PairingError(
            f"challenge mismatch: ground truth is {eval_set.challenge!r}, "
            f"predictions are {pred_set.challenge!r}"
        )
    warnings = []
    total = len(eval_set.frames)
    missing = sum(1 for fid in eval_set.frames if fid not in pred_set.frames)
    if missing:
        warnings.append(f"{missing}/{total} frames have no predictions")
    if eval_set.challenge == "object":
        gt_labels = {b.class_label for f in eval_set.frames.values() for b in f.boxes}
        pred_labels = {b.class_label for f in pred_set.frames.values() for b in f.boxes}
        for label in sorted(pred_labels - gt_labels):
            warnings.append(f"class {label!r} is predicted but absent from the ground truth")
    return warnings


# ---------------------------------------------------------------- serializing


def _num(v: float):
    return int(v) if float(v).is_integer() else float(v)


def _pts(arr) -> list:
    return [[_num(x), _num(y)] for x, y in np.asarray(arr).tolist()]


def _gt_record(challenge: str, f) -> dict:
    rec: dict = {"frame_id": f.frame_id, "width": _num(f.width), "height": _num(f.height)}
    if challenge == "rail":
        rec["rails"] = [{"points": _pts(r.points)} for r in f.rails]
        rec["ignore_regions"] = [{"points": _pts(p.vertices)} for p in f.ignore_regions]
    elif challenge == "object":
        rec["boxes"] = [
            {"label": b.class_label, "bbox": [_num(b.x), _num(b.y), _num(b.w), _num(b.h)],
             "occlusion": _num(b.occlusion), "iscrowd": b.iscrowd, "ignore": b.ignore}
            for b in f.boxes
        ]
    else:
        rec["mask"] = f.mask
    return rec


def _pred_record(challenge: str, f) -> dict:
    rec: dict = {"frame_id": f.frame_id}
    if challenge == "rail":
        rec["rails"] = [{"points": _pts(r.points), "score": _num(r.score)} for r in f.rails]
    elif challenge == "object":
        rec["boxes"] = [
            {"label": b.class_label, "bbox": [_num(b.x), _num(b.y), _num(b.w), _num(b.h)],
             "score": _num(b.score)}
            for b in f.boxes
        ]
    else:
        rec["mask"] = f.mask
    return rec


def _dump(header: dict, records) -> str:
    lines = [json.dumps(header, separators=(", ", ": "))]
    lines += [json.dumps(r, separators=(", ", ": ")) for r in records]
    return "\n".join(lines) + "\n"


def dumps_ground_truth(eval_set: EvalSet) -> str:
    header = {"schema_version": eval_set.schema_version, "challenge": eval_set.challenge,
              "kind": "ground_truth"}
    return _dump(header, (_gt_record(eval_set.challenge, f) for f in eval_set.frames.values()))


def dumps_predictions(pred_set: PredictionSet) -> str:
    header = {"schema_version": pred_set.schema_version, "challenge": pred_set.challenge,
              "kind": "predictions"}
    return _dump(header, (_pred_record(pred_set.challenge, f) for f in pred_set.frames.values()))


def records_of(eval_set: EvalSet) -> list[dict]:
    """Canonical plain-data view of an EvalSet, for structural comparison."""
    return [_gt_record(eval_set.challenge, f) for f in eval_set.frames.values()]


# ---------------------------------------------------------------- converters


def read_mask(path: PathLike) -> LabelMask:
    with Image.open(path) as img:
        return LabelMask(np.asarray(img, dtype=np.uint8))


def rail_eval_frames(eval_set: EvalSet, pred_set: Optional[PredictionSet] = None) -> list[LineEvalFrame]:
    frames = []
    for fid, f in eval_set.frames.items():
        pred = pred_set.get(fid) if pred_set is not None else None
        frames.append(LineEvalFrame(fid, f.width, f.height, f.rails,
                                    pred.rails if pred is not None else (), f.ignore_regions))
    return frames


def object_eval_frames(eval_set: EvalSet, pred_set: Optional[PredictionSet] = None) -> list[DetectionFrame]:
    frames = []
    for fid, f in eval_set.frames.items():
        pred = pred_set.get(fid) if pred_set is not None else None
        frames.append(DetectionFrame(fid, f.boxes, pred.boxes if pred is not None else (),
                                     f.width, f.height))
    return frames


def vegetation_mask_pairs(eval_set: EvalSet, pred_set: PredictionSet) -> Iterator[tuple[LabelMask, LabelMask]]:
    """(gt, pred) masks per frame; a frame without prediction counts as all background."""
    for fid, f in eval_set.frames.items():
        gt = read_mask(f.mask_path)
        pred = pred_set.get(fid)
        if pred is None:
            yield gt, LabelMask(np.zeros_like(gt.labels))
        else:
            yield gt, read_mask(pred.mask_path)

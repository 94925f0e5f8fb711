"""Metric suites per challenge and deterministic report rendering."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from . import __version__
from ._parallel import ordered_map
from .ap_core import MetricRow
from .dataset_io import (
    EvalSet,
    PredictionSet,
    load_ground_truth,
    load_predictions,
    object_eval_frames,
    rail_eval_frames,
    read_mask,
    validate_pairing,
)
from .detection_metrics import (
    COCO_IOU_THRESHOLDS,
    DEFAULT_DIFFICULTIES,
    Difficulty,
    check_nested,
    map_summary,
)
from .line_metrics import LineEvalConfig, chamfer_ap, culane_f1, line_ap, tusimple_accuracy
from .segmentation_metrics import (
    IGNORE_LABEL,
    REPORTED_CLASSES,
    ConfusionMatrix,
    LabelMask,
    accumulate,
    class_iou,
)

__all__ = [
    "REPORT_SCHEMA_VERSION",
    "ConfigError",
    "EvalConfig",
    "EvalReport",
    "load_config",
    "rail_rows",
    "object_rows",
    "vegetation_rows",
    "run_eval",
    "evaluate_sets",
]

REPORT_SCHEMA_VERSION = "1.0"
PathLike = Union[str, Path]


class ConfigError(ValueError):
    """The configuration file is malformed or inconsistent."""


@dataclass(frozen=True)
class EvalConfig:
    line: LineEvalConfig = field(default_factory=LineEvalConfig)
    difficulties: tuple = DEFAULT_DIFFICULTIES
    iou_thresholds: tuple = COCO_IOU_THRESHOLDS
    ignore_label: int = IGNORE_LABEL

    def echo(self) -> dict:
        return {
            "line": self.line.to_dict(),
            "object": {
                "difficulties": {d.name: d.to_dict() for d in self.difficulties},
                "iou_thresholds": list(self.iou_thresholds),
            },
            "vegetation": {"ignore_label": self.ignore_label},
        }


def _unknown(section: str, got: dict, allowed) -> None:
    extra = sorted(set(got) - set(allowed))
    if extra:
        raise ConfigError(f"config: unknown key {section}{extra[0]!r}")


def config_from_dict(data: dict) -> EvalConfig:
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be an object")
    _unknown("", data, ("line", "object", "vegetation"))
    try:
        line_data = data.get("line", {})
        _unknown("line.", line_data, [f.name for f in fields(LineEvalConfig)])
        line = LineEvalConfig(**line_data)

        obj = data.get("object", {})
        _unknown("object.", obj, ("difficulties", "iou_thresholds"))
        diffs = list(DEFAULT_DIFFICULTIES)
        for name, gate in obj.get("difficulties", {}).items():
            names = [d.name for d in diffs]
            if name not in names:
                raise ConfigError(f"config: unknown difficulty {name!r}; expected {names}")
            _unknown(f"object.difficulties.{name}.", gate, ("min_area", "max_occlusion", "inclusive"))
            i = names.index(name)
            base = diffs[i]
            diffs[i] = Difficulty(
                name,
                float(gate.get("min_area", base.min_area)),
                float(gate.get("max_occlusion", base.max_occlusion)),
                bool(gate.get("inclusive", base.inclusive)),
            )
        check_nested(diffs)
        ious = tuple(float(t) for t in obj.get("iou_thresholds", COCO_IOU_THRESHOLDS))
        if not ious or any(not 0.5 <= t <= 0.95 for t in ious):
            raise ConfigError("config: object.iou_thresholds must lie in [0.5, 0.95]")

        veg = data.get("vegetation", {})
        _unknown("vegetation.", veg, ("ignore_label",))
        ignore = veg.get("ignore_label", IGNORE_LABEL)
        if not isinstance(ignore, int) or not 3 <= ignore <= 255:
            raise ConfigError("config: vegetation.ignore_label must be an integer in 3..255")
    except ConfigError:
        raise
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"config: {exc}") from None
    return EvalConfig(line, tuple(diffs), ious, ignore)


def load_config(path: Optional[PathLike]) -> EvalConfig:
    if path is None:
        return EvalConfig()
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})") from None
    return config_from_dict(data)


# ------------------------------------------------------------------- suites


def _thr(v: float) -> str:
    return f"{v:g}"


def rail_rows(frames, cfg: LineEvalConfig, workers: int = 1) -> list[MetricRow]:
    """The four polyline metric families at their configured thresholds."""
    rows = [MetricRow("TuSimple Acc", _thr(t), tusimple_accuracy(frames, cfg, t, workers))
            for t in cfg.tusimple_rel_thresholds]
    rows += [MetricRow("CULane F1", _thr(t), culane_f1(frames, cfg, t, workers))
             for t in cfg.culane_rel_widths]
    for name, fn, thresholds in (
        ("ChamferAP", chamfer_ap, cfg.chamfer_rel_thresholds),
        ("LineAP", line_ap, cfg.rel_dist_thresholds),
    ):
        aps = [fn(frames, cfg, t, workers).ap for t in thresholds]
        rows += [MetricRow(name, _thr(t), ap) for t, ap in zip(thresholds, aps)]
        rows.append(MetricRow(name, "avg", float(np.mean(aps))))
    return rows


def object_rows(frames, cfg: EvalConfig, workers: int = 1) -> list[MetricRow]:
    return map_summary(frames, cfg.difficulties, cfg.iou_thresholds, workers).rows()


def _mask_counts(pair, ignore_label):
    gt_path, pred_path, shape = pair
    gt = read_mask(gt_path)
    pred = read_mask(pred_path) if pred_path is not None else LabelMask(np.zeros(shape, np.uint8))
    return accumulate(gt, pred, None, ignore_label)


def vegetation_rows(eval_set: EvalSet, pred_set: PredictionSet, cfg: EvalConfig,
                    workers: int = 1) -> list[MetricRow]:
    jobs = []
    for fid, f in eval_set.frames.items():
        pred = pred_set.get(fid)
        jobs.append((f.mask_path, pred.mask_path if pred is not None else None,
                     (f.height, f.width)))
    acc = ConfusionMatrix.empty()
    for part in ordered_map(lambda j: _mask_counts(j, cfg.ignore_label), jobs, workers):
        acc = acc + part
    scores = class_iou(acc)
    rows = [MetricRow("IoU", name, scores.per_class[name]) for name in scores.per_class]
    rows.append(MetricRow("mIoU", "+".join(REPORTED_CLASSES), scores.mean))
    return rows


# ------------------------------------------------------------------- report


@dataclass(frozen=True)
class EvalReport:
    challenge: str
    config: dict
    rows: tuple
    warnings: tuple
    digests: dict
    tool_version: str = __version__

    def to_dict(self) -> dict:
        return {
            "report_schema_version": REPORT_SCHEMA_VERSION,
            "tool": "raileval",
            "tool_version": self.tool_version,
            "challenge": self.challenge,
            "config": self.config,
            "results": [
                {"metric": r.metric, "threshold": r.threshold, "value": r.value} for r in self.rows
            ],
            "warnings": list(self.warnings),
            "inputs": dict(self.digests),
        }

    def to_machine(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        title = f"raileval {self.tool_version} | challenge: {self.challenge}"
        if self.challenge == "rail":
            body = _wide_table(self.rows)
        else:
            body = _tall_table(self.rows)
        out = [title, "", body]
        if self.warnings:
            out += ["", "warnings:"] + [f"  - {w}" for w in self.warnings]
        out += ["", "inputs:"] + [f"  {k}: {v}" for k, v in sorted(self.digests.items())]
        return "\n".join(out) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "machine":
            return self.to_machine()
        if fmt == "table":
            return self.to_table()
        raise ValueError(f"unknown report format {fmt!r}")


def _pct(v: Optional[float]) -> str:
    return "n/a" if v is None else f"{100.0 * v:.1f}"


def _wide_table(rows: Sequence[MetricRow]) -> str:
    """One column per metric, grouped under a family header."""
    prefix = {"TuSimple Acc": "Acc", "CULane F1": "F1", "ChamferAP": "AP", "LineAP": "AP"}
    heads = [f"{prefix.get(r.metric, r.metric)}@{r.threshold}" if r.threshold != "avg"
             else "AP_avg" for r in rows]
    cells = [_pct(r.value) for r in rows]
    widths = [max(len(h), len(c)) for h, c in zip(heads, cells)]
    groups: list[tuple[str, list[int]]] = []
    for i, r in enumerate(rows):
        if groups and groups[-1][0] == r.metric:
            groups[-1][1].append(i)
        else:
            groups.append((r.metric, [i]))
    for name, idx in groups:
        span = sum(widths[i] for i in idx) + len(idx) - 1
        widths[idx[-1]] += max(0, len(name) - span)

    def line(values):
        return " | ".join(" ".join(values[i].rjust(widths[i]) for i in idx) for _, idx in groups)

    spans = [sum(widths[i] for i in idx) + len(idx) - 1 for _, idx in groups]
    fam = " | ".join(name.center(w) for (name, _), w in zip(groups, spans))
    sep = "-+-".join("-" * w for w in spans)
    return "\n".join([fam, sep, line(heads), line(cells)])


def _tall_table(rows: Sequence[MetricRow]) -> str:
    labels = [f"{r.metric} {r.threshold}" for r in rows]
    w = max(len(s) for s in labels) if labels else 0
    lines = [f"{'metric'.ljust(w)} | value", f"{'-' * w}-+------"]
    lines += [f"{s.ljust(w)} | {_pct(r.value).rjust(5)}" for s, r in zip(labels, rows)]
    return "\n".join(lines)


def _sha256(path: PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _notes(challenge: str, cfg: EvalConfig) -> list[str]:
    notes = []
    if challenge == "object":
        mod = next((d for d in cfg.difficulties if d.name == "moderate"), None)
        if mod is not None and mod == DEFAULT_DIFFICULTIES[1]:
            notes.append("moderate difficulty gate is a provisional default "
                         "(area >= 625 px^2, occlusion < 0.50)")
    if challenge == "vegetation":
        notes.append("mIoU averages the vegetation classes only; background is listed separately")
    return notes


def evaluate_sets(eval_set: EvalSet, pred_set: PredictionSet, cfg: EvalConfig,
                  workers: int = 1) -> tuple[list[MetricRow], list[str]]:
    """Run the challenge's metric suite; returns rows and the pairing warnings."""
    warnings = list(eval_set.warnings) + list(pred_set.warnings)
    warnings += validate_pairing(eval_set, pred_set)
    challenge = eval_set.challenge
    if challenge == "rail":
        rows = rail_rows(rail_eval_frames(eval_set, pred_set), cfg.line, workers)
    elif challenge == "object":
        rows = object_rows(object_eval_frames(eval_set, pred_set), cfg, workers)
    else:
        rows = vegetation_rows(eval_set, pred_set, cfg, workers)
    return rows, warnings + _notes(challenge, cfg)


def run_eval(challenge: str, gt_path: PathLike, pred_path: PathLike,
             config_path: Optional[PathLike] = None, threads: int = 1) -> EvalReport:
    """Load both files, evaluate, and assemble the report. Raises on any input error."""
    cfg = load_config(config_path)
    eval_set = load_ground_truth(gt_path, challenge)
    pred_set = load_predictions(pred_path, eval_set)
    rows, warnings = evaluate_sets(eval_set, pred_set, cfg, threads)
    digests = {"ground_truth_sha256": _sha256(gt_path), "predictions_sha256": _sha256(pred_path)}
    if config_path is not None:
        digests["config_sha256"] = _sha256(config_path)
    return EvalReport(challenge, cfg.echo(), tuple(rows), tuple(warnings), digests)

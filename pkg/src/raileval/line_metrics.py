"""Polyline metrics: LineAP, ChamferAP, TuSimple accuracy and CULane-style F1.

All distances are given relative to the image width (in percent) unless the
config selects ``threshold_mode="absolute"``, in which case every length-like
value is read as pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from functools import cached_property
from typing import Hashable, Sequence

import numpy as np
import shapely

from ._parallel import ordered_map
from .ap_core import APResult, ap_from_units, greedy_match_matrix, match_edges
from .geometry import (
    Polyline,
    _split_arrays,
    buffer_polyline,
    clip_polyline_outside,
    resample_uniform,
)

__all__ = [
    "LineEvalConfig",
    "LineEvalFrame",
    "MatchRound",
    "TuSimpleBreakdown",
    "line_ap",
    "chamfer_distance",
    "chamfer_ap",
    "tusimple_accuracy",
    "tusimple_breakdown",
    "culane_f1",
    "clipped_predictions",
]


def _positive_tuple(name, values):
    values = tuple(float(v) for v in values)
    if not values or any(not v > 0 for v in values):
        raise ValueError(f"{name} must be a non-empty list of positive values, got {values}")
    return values


@dataclass(frozen=True)
class LineEvalConfig:
    rel_dist_thresholds: tuple = (0.1, 0.5, 1.0)
    orientation_threshold: float = 10.0
    rel_seg_len: float = 0.5
    residual_merge_fraction: float = 0.25
    score_group_epsilon: float = 1e-9
    chamfer_samples: int = 100
    chamfer_rel_thresholds: tuple = (0.5, 1.0, 5.0)
    tusimple_rel_thresholds: tuple = (0.1, 0.2, 1.0)
    tusimple_row_step_rel: float = 1.0
    tusimple_line_pass_rate: float = 0.85
    culane_rel_widths: tuple = (0.2, 0.5, 1.0)
    culane_match_iou: float = 0.5
    threshold_mode: str = "relative"

    def __post_init__(self):
        for name in (
            "rel_dist_thresholds",
            "chamfer_rel_thresholds",
            "tusimple_rel_thresholds",
            "culane_rel_widths",
        ):
            object.__setattr__(self, name, _positive_tuple(name, getattr(self, name)))
        if not 0 < self.orientation_threshold <= 90:
            raise ValueError("orientation_threshold must lie in (0, 90]")
        for name in ("rel_seg_len", "tusimple_row_step_rel"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not 0 <= self.residual_merge_fraction < 1:
            raise ValueError("residual_merge_fraction must lie in [0, 1)")
        if not self.score_group_epsilon >= 0:
            raise ValueError("score_group_epsilon must be >= 0")
        if int(self.chamfer_samples) != self.chamfer_samples or self.chamfer_samples < 2:
            raise ValueError("chamfer_samples must be an integer >= 2")
        if not 0 < self.culane_match_iou <= 1:
            raise ValueError("culane_match_iou must lie in (0, 1]")
        if not 0 < self.tusimple_line_pass_rate <= 1:
            raise ValueError("tusimple_line_pass_rate must lie in (0, 1]")
        if self.threshold_mode not in ("relative", "absolute"):
            raise ValueError("threshold_mode must be 'relative' or 'absolute'")

    def to_dict(self) -> dict:
        return {f.name: (list(v) if isinstance(v := getattr(self, f.name), tuple) else v)
                for f in fields(self)}

    def px(self, value: float, extent: float) -> float:
        """Convert a configured length to pixels for an image extent."""
        return value if self.threshold_mode == "absolute" else value * extent / 100.0


@dataclass(frozen=True, eq=False)
class LineEvalFrame:
    frame_id: Hashable
    image_width: float
    image_height: float
    gt_lines: tuple = ()
    pred_lines: tuple = ()
    ignore_regions: tuple = ()

    def __post_init__(self):
        if not (self.image_width > 0 and self.image_height > 0):
            raise ValueError(f"frame {self.frame_id!r}: image dimensions must be positive")
        for name in ("gt_lines", "pred_lines", "ignore_regions"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @cached_property
    def clipped_predictions(self) -> tuple:
        """Predicted lines with every part inside an ignore region cut away."""
        out = []
        for line in self.pred_lines:
            out.extend(clip_polyline_outside(line, self.ignore_regions))
        return tuple(out)

    @cached_property
    def _packs(self) -> dict:
        return {}

    def transformed(self, scale: float = 1.0, offset=(0.0, 0.0), score_fn=None) -> "LineEvalFrame":
        """Copy with coordinates mapped by ``p * scale + offset``.

        Image dimensions are multiplied by ``scale``; ``score_fn`` remaps scores.
        """
        preds = [p.transformed(scale, offset) for p in self.pred_lines]
        if score_fn is not None:
            preds = [p.with_score(score_fn(_score(p))) for p in preds]
        return LineEvalFrame(
            self.frame_id,
            self.image_width * scale,
            self.image_height * scale,
            [g.transformed(scale, offset) for g in self.gt_lines],
            preds,
            [r.transformed(scale, offset) for r in self.ignore_regions],
        )


@dataclass(frozen=True)
class MatchRound:
    """One simultaneous matching step of LineAP (one score group in one frame)."""

    frame_id: Hashable
    score: float
    n_pred: int
    n_gt_free: int
    n_matched: int
    matched_cost: float


def _score(line: Polyline) -> float:
    return 1.0 if line.score is None else line.score


def clipped_predictions(frame: LineEvalFrame) -> list[Polyline]:
    """Predicted lines with every part inside an ignore region cut away."""
    return list(frame.clipped_predictions)


# --------------------------------------------------------------------- LineAP


def _score_groups(scores: Sequence[float], eps: float) -> dict[float, float]:
    """Map each score to the top score of its group (scores within ``eps`` chain together)."""
    rep: dict[float, float] = {}
    head = None
    prev = None
    for s in sorted(set(scores), reverse=True):
        if prev is None or prev - s > eps:
            head = s
        rep[s] = head
        prev = s
    return rep


@dataclass
class _SegmentPack:
    centers: np.ndarray
    orient: np.ndarray
    parent: np.ndarray
    chord_a: np.ndarray
    chord_b: np.ndarray
    chord_owner: np.ndarray

    @classmethod
    def build(cls, lines, seg_len, merge_fraction):
        centers, orient, parent, ca, cb, owner = [], [], [], [], [], []
        k = 0
        for li, line in enumerate(lines):
            cuts, cut_pts, c, a, b, own = _split_arrays(line.points, seg_len, merge_fraction)
            d = cut_pts[1:] - cut_pts[:-1]
            centers.append(c)
            orient.append(np.degrees(np.arctan2(d[:, 1], d[:, 0])))
            parent.append(np.full(len(c), li))
            ca.append(a)
            cb.append(b)
            owner.append(own + k)
            k += len(c)
        if k == 0:
            z = np.empty((0, 2))
            return cls(z, np.empty(0), np.empty(0, dtype=np.int64), z, z,
                       np.empty(0, dtype=np.int64))
        orient = np.concatenate(orient) % 180.0
        orient[orient >= 180.0] = 0.0
        return cls(
            np.vstack(centers),
            orient + 0.0,
            np.concatenate(parent),
            np.vstack(ca),
            np.vstack(cb),
            np.concatenate(owner),
        )

    def __len__(self):
        return len(self.orient)


def _center_to_segment_distance(centers, pack: _SegmentPack, seg_idx: np.ndarray) -> np.ndarray:
    """(len(centers), len(seg_idx)) distances from points to the chord chains of segments."""
    chord_sel = np.flatnonzero(np.isin(pack.chord_owner, seg_idx))
    a = pack.chord_a[chord_sel]
    ab = pack.chord_b[chord_sel] - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom = np.where(denom > 0, denom, 1.0)
    ap = centers[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("mkj,kj->mk", ap, ab) / denom, 0.0, 1.0)
    diff = ap - t[..., None] * ab[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    owners = pack.chord_owner[chord_sel]
    starts = np.flatnonzero(np.r_[True, owners[1:] != owners[:-1]])
    return np.minimum.reduceat(d, starts, axis=1)


def _line_ap_frame(frame: LineEvalFrame, cfg: LineEvalConfig, dist_value: float, groups):
    width = frame.image_width
    seg_len = cfg.px(cfg.rel_seg_len, width)
    dist_thr = cfg.px(dist_value, width)
    preds = frame.clipped_predictions
    key = (seg_len, cfg.residual_merge_fraction)
    packs = frame._packs.get(key)
    if packs is None:
        packs = (_SegmentPack.build(frame.gt_lines, seg_len, cfg.residual_merge_fraction),
                 _SegmentPack.build(preds, seg_len, cfg.residual_merge_fraction))
        frame._packs[key] = packs
    gt, pr = packs
    line_scores = np.array([groups[_score(p)] for p in preds])
    seg_score = line_scores[pr.parent] if len(pr) else np.empty(0)

    gt_taken = np.zeros(len(gt), dtype=bool)
    is_tp = np.zeros(len(pr), dtype=bool)
    rounds = []
    for score in sorted(set(line_scores.tolist()), reverse=True):
        seg_idx = np.flatnonzero(seg_score == score)
        free = np.flatnonzero(~gt_taken)
        n_matched, cost = 0, 0.0
        if len(seg_idx) and len(free):
            dist = _center_to_segment_distance(gt.centers[free], pr, seg_idx)
            od = np.abs(gt.orient[free][:, None] - pr.orient[seg_idx][None, :]) % 180.0
            od = np.minimum(od, 180.0 - od)
            g_loc, p_loc = np.nonzero((dist < dist_thr) & (od < cfg.orientation_threshold))
            costs = dist[g_loc, p_loc]
            sel = match_edges(p_loc, g_loc, costs, len(seg_idx), len(free))
            is_tp[seg_idx[p_loc[sel]]] = True
            gt_taken[free[g_loc[sel]]] = True
            n_matched, cost = len(sel), float(np.sum(costs[sel]))
        rounds.append(MatchRound(frame.frame_id, score, len(seg_idx), len(free), n_matched, cost))
    units = list(zip(seg_score.tolist(), is_tp.tolist()))
    return units, len(gt), rounds


def line_ap(
    frames: Sequence[LineEvalFrame],
    cfg: LineEvalConfig,
    rel_dist: float,
    workers: int = 1,
) -> APResult:
    """Segment-level AP over polylines.

    Predicted lines are clipped against ignore regions, every line is cut into
    fixed-length segments, and predicted segments are matched to ground-truth
    segments one confidence group at a time (highest first) by
    minimum-weight maximum matching. A pair is admissible when the distance
    from the ground-truth segment centre to the predicted segment and their
    orientation difference are both below threshold. Segments are pooled over
    all frames for the PR curve.

    The per-round matching trace is returned in ``APResult.trace``.
    """
    all_scores = [_score(p) for f in frames for p in f.pred_lines]
    groups = _score_groups(all_scores, cfg.score_group_epsilon)
    per_frame = ordered_map(lambda f: _line_ap_frame(f, cfg, rel_dist, groups), frames, workers)
    units, total_gt, trace = [], 0, []
    for u, n, rounds in per_frame:
        units.extend(u)
        total_gt += n
        trace.extend(rounds)
    return ap_from_units(units, total_gt, rel_dist, "LineAP", tuple(trace))


# ------------------------------------------------------------------ ChamferAP


def _pairwise(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = a[:, None, :] - b[None, :, :]
    return np.hypot(d[..., 0], d[..., 1])


def chamfer_distance(a, b) -> float:
    """Symmetric Chamfer distance: mean of the two directed mean nearest-neighbour distances."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 2)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 2)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("chamfer_distance needs two non-empty point sets")
    d = _pairwise(a, b)
    return 0.5 * (float(d.min(axis=1).mean()) + float(d.min(axis=0).mean()))


def _chamfer_matrix(preds: np.ndarray, gts: np.ndarray) -> np.ndarray:
    """Chamfer distances between stacks of sampled lines, shape (P, G)."""
    d = preds[:, None, :, None, :] - gts[None, :, None, :, :]
    d = np.hypot(d[..., 0], d[..., 1])
    return 0.5 * (d.min(axis=3).mean(axis=2) + d.min(axis=2).mean(axis=2))


def _by_score(lines: Sequence[Polyline]) -> list[Polyline]:
    return sorted(lines, key=lambda p: -_score(p))


def _chamfer_frame(frame: LineEvalFrame, cfg: LineEvalConfig, thr_value: float):
    preds = _by_score(frame.clipped_predictions)
    scores = [_score(p) for p in preds]
    n_gt = len(frame.gt_lines)
    if not preds or not n_gt:
        return [(s, False) for s in scores], n_gt
    n = int(cfg.chamfer_samples)
    ps = np.stack([resample_uniform(p, n) for p in preds])
    gs = np.stack([resample_uniform(g, n) for g in frame.gt_lines])
    cd = _chamfer_matrix(ps, gs)
    pairs = greedy_match_matrix(cd <= cfg.px(thr_value, frame.image_width), cd)
    hit = np.zeros(len(preds), dtype=bool)
    hit[[i for i, _ in pairs]] = True
    return list(zip(scores, hit.tolist())), n_gt


def chamfer_ap(
    frames: Sequence[LineEvalFrame],
    cfg: LineEvalConfig,
    rel_thresh: float,
    workers: int = 1,
) -> APResult:
    """Instance-level AP with Chamfer distance as the similarity measure."""
    per_frame = ordered_map(lambda f: _chamfer_frame(f, cfg, rel_thresh), frames, workers)
    units = [u for us, _ in per_frame for u in us]
    return ap_from_units(units, sum(n for _, n in per_frame), rel_thresh, "ChamferAP")


# ------------------------------------------------------------------- TuSimple

_ROW_EPS = 1e-9


def _row_crossings(points: np.ndarray, step: float, x_tol: float) -> dict[int, list[float]]:
    """x positions where the polyline crosses each sampling row ``y = k * step``.

    Horizontal chords have no well-defined crossing and are skipped.
    """
    u = (points[:, 1] / step).tolist()
    xs = points[:, 0].tolist()
    rows: dict[int, list[float]] = {}
    for i in range(len(u) - 1):
        u0, u1 = u[i], u[i + 1]
        if u0 == u1:
            continue
        lo, hi = min(u0, u1), max(u0, u1)
        for k in range(math.ceil(lo - _ROW_EPS), math.floor(hi + _ROW_EPS) + 1):
            t = min(1.0, max(0.0, (k - u0) / (u1 - u0)))
            rows.setdefault(k, []).append(xs[i] + t * (xs[i + 1] - xs[i]))
    out = {}
    for k, vals in rows.items():
        vals.sort()
        kept = [vals[0]]
        for v in vals[1:]:
            if v - kept[-1] > x_tol:
                kept.append(v)
        out[k] = kept
    return out


@dataclass(frozen=True)
class TuSimpleBreakdown:
    matched_points: int
    total_points: int
    gt_lines: int
    lines_passing: int
    lines_without_samples: int

    @property
    def accuracy(self) -> float:
        return self.matched_points / self.total_points if self.total_points else 0.0

    @property
    def line_pass_rate(self) -> float:
        return self.lines_passing / self.gt_lines if self.gt_lines else 0.0


def _tusimple_frame(frame: LineEvalFrame, cfg: LineEvalConfig, thr_value: float):
    step = cfg.px(cfg.tusimple_row_step_rel, frame.image_height)
    thr = cfg.px(thr_value, frame.image_width)
    x_tol = 1e-9 * frame.image_width
    gts = [_row_crossings(g.points, step, x_tol) for g in frame.gt_lines]
    preds = [_row_crossings(p.points, step, x_tol) for p in frame.clipped_predictions]
    n_points = [sum(len(xs) for xs in g.values()) for g in gts]

    counts = np.zeros((len(gts), len(preds)), dtype=np.int64)
    for gi, g in enumerate(gts):
        for pi, p in enumerate(preds):
            c = 0
            for k, gx in g.items():
                px = p.get(k)
                if px is not None:
                    c += sum(1 for x in gx if min(abs(x - q) for q in px) <= thr)
            counts[gi, pi] = c

    matched = np.zeros(len(gts), dtype=np.int64)
    free_pred = np.ones(len(preds), dtype=bool)
    free_gt = np.ones(len(gts), dtype=bool)
    # greedy on matched-point count, ties by (gt index, pred index)
    order = np.lexsort((np.tile(np.arange(len(preds)), len(gts)),
                        np.repeat(np.arange(len(gts)), len(preds)),
                        -counts.ravel()))
    for flat in order:
        gi, pi = divmod(int(flat), len(preds))
        if counts[gi, pi] == 0:
            break
        if free_gt[gi] and free_pred[pi]:
            matched[gi] = counts[gi, pi]
            free_gt[gi] = free_pred[pi] = False

    passing = sum(
        1 for m, n in zip(matched, n_points) if n and m / n >= cfg.tusimple_line_pass_rate
    )
    return TuSimpleBreakdown(
        int(matched.sum()), int(sum(n_points)), len(gts), passing, sum(1 for n in n_points if n == 0)
    )


def tusimple_breakdown(
    frames: Sequence[LineEvalFrame], cfg: LineEvalConfig, rel_thresh: float, workers: int = 1
) -> TuSimpleBreakdown:
    """Pooled TuSimple counts, including the per-line pass-rate diagnostic."""
    parts = ordered_map(lambda f: _tusimple_frame(f, cfg, rel_thresh), frames, workers)
    return TuSimpleBreakdown(*(sum(getattr(p, f.name) for p in parts)
                               for f in fields(TuSimpleBreakdown)))


def tusimple_accuracy(
    frames: Sequence[LineEvalFrame], cfg: LineEvalConfig, rel_thresh: float, workers: int = 1
) -> float:
    """Fraction of ground-truth row samples matched by the assigned prediction.

    Rows are placed every ``tusimple_row_step_rel`` percent of the image
    height. Each GT line is paired with the predicted line that matches most of
    its samples (one prediction per GT line). Unpaired predictions are not
    penalised, and near-horizontal lines yield few samples.
    """
    return tusimple_breakdown(frames, cfg, rel_thresh, workers).accuracy


# --------------------------------------------------------------------- CULane


def _culane_frame(frame: LineEvalFrame, cfg: LineEvalConfig, width_value: float):
    half = cfg.px(width_value, frame.image_width)
    preds = _by_score(frame.clipped_predictions)
    n_gt = len(frame.gt_lines)
    if not preds or not n_gt:
        return 0, len(preds), n_gt
    pp = np.array([buffer_polyline(p, half).to_shapely() for p in preds], dtype=object)
    gp = np.array([buffer_polyline(g, half).to_shapely() for g in frame.gt_lines], dtype=object)
    inter = shapely.area(shapely.intersection(pp[:, None], gp[None, :]))
    union = shapely.area(shapely.union(pp[:, None], gp[None, :]))
    iou = np.where(union > 0, inter / np.where(union > 0, union, 1.0), 0.0)
    tp = len(greedy_match_matrix(iou >= cfg.culane_match_iou, 1.0 - iou))
    return tp, len(preds) - tp, n_gt - tp


def culane_f1(
    frames: Sequence[LineEvalFrame], cfg: LineEvalConfig, rel_width: float, workers: int = 1
) -> float:
    """F1 of IoU-matched line buffers, pooled over frames.

    Lines are widened into bands of half-width ``rel_width`` percent of the
    image width; a pair matches when band IoU reaches ``culane_match_iou``.
    With nothing to detect and nothing predicted the score is 1.
    """
    parts = ordered_map(lambda f: _culane_frame(f, cfg, rel_width), frames, workers)
    tp = sum(p[0] for p in parts)
    fp = sum(p[1] for p in parts)
    fn = sum(p[2] for p in parts)
    denom = 2 * tp + fp + fn
    return 1.0 if denom == 0 else 2 * tp / denom

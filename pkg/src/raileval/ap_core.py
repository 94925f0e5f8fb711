"""Matching and precision-recall machinery shared by all AP-style metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "MatchCandidate",
    "PRPoint",
    "APResult",
    "MetricRow",
    "RECALL_GRID",
    "greedy_match",
    "greedy_match_matrix",
    "min_weight_max_matching",
    "match_edges",
    "pr_curve",
    "average_precision",
    "ap_from_units",
]

# i / 100 rather than linspace so that e.g. recall 29/100 hits its grid point exactly
RECALL_GRID = np.arange(101, dtype=np.float64) / 100.0


@dataclass(frozen=True)
class MatchCandidate:
    pred_id: Hashable
    gt_id: Hashable
    cost: float
    frame_id: Hashable = None


@dataclass(frozen=True)
class PRPoint:
    score_threshold: float
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        n = self.tp + self.fp
        return 1.0 if n == 0 else self.tp / n

    @property
    def recall(self) -> float:
        n = self.tp + self.fn
        return 1.0 if n == 0 else self.tp / n


@dataclass(frozen=True)
class APResult:
    ap: float
    curve: tuple[PRPoint, ...]
    threshold: float
    metric_name: str
    trace: tuple = field(default=(), compare=False)

    @property
    def final(self) -> PRPoint:
        return self.curve[-1]


@dataclass(frozen=True)
class MetricRow:
    """One reported number: ``value`` is None when the metric is undefined."""

    metric: str
    threshold: str
    value: Optional[float]


def greedy_match_matrix(valid: np.ndarray, cost: np.ndarray) -> list[tuple[int, int]]:
    """Greedy matching over rows already ordered by descending score.

    Each row takes the still-free valid column of minimal cost (lowest column
    index on ties) or stays unmatched.
    """
    valid = np.asarray(valid, dtype=bool)
    n_pred, n_gt = valid.shape
    free = np.ones(n_gt, dtype=bool)
    pairs = []
    for i in range(n_pred):
        ok = valid[i] & free
        if not ok.any():
            continue
        j = int(np.argmin(np.where(ok, cost[i], np.inf)))
        free[j] = False
        pairs.append((i, j))
    return pairs


def greedy_match(
    preds: Sequence,
    gts: Sequence,
    valid: Callable[[object, object], bool],
    cost: Callable[[object, object], float],
) -> list[tuple[int, int]]:
    """Greedy score-ordered matching; ``preds`` must be sorted by descending score.

    Returns ``(pred_index, gt_index)`` pairs.
    """
    if not preds or not gts:
        return []
    v = np.array([[bool(valid(p, g)) for g in gts] for p in preds])
    c = np.array([[float(cost(p, g)) if v[i, j] else np.inf for j, g in enumerate(gts)]
                  for i, p in enumerate(preds)])
    return greedy_match_matrix(v, c)


def match_edges(
    rows: np.ndarray, cols: np.ndarray, costs: np.ndarray, n_rows: int, n_cols: int
) -> np.ndarray:
    """Minimum-weight maximum-cardinality matching on an edge list.

    Returns the indices of the selected edges, sorted. The graph is split into
    connected components and each is solved as a dense assignment problem in
    which missing edges carry a penalty larger than any achievable real cost,
    so cardinality is maximised first and cost second.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    costs = np.asarray(costs, dtype=np.float64)
    if len(rows) == 0:
        return np.empty(0, dtype=np.int64)

    graph = coo_matrix(
        (np.ones(len(rows)), (rows, n_rows + cols)), shape=(n_rows + n_cols,) * 2
    )
    _, labels = connected_components(graph, directed=False)
    edge_label = labels[rows]
    order = np.lexsort((cols, rows, edge_label))
    bounds = np.flatnonzero(np.diff(edge_label[order])) + 1
    chosen = []
    for part in np.split(order, bounds):
        if len(part) == 1:
            chosen.append(part)
            continue
        r_ids, r_loc = np.unique(rows[part], return_inverse=True)
        c_ids, c_loc = np.unique(cols[part], return_inverse=True)
        penalty = (min(len(r_ids), len(c_ids)) + 1) * (float(costs[part].max()) + 1.0)
        dense = np.full((len(r_ids), len(c_ids)), penalty)
        edge_at = np.full((len(r_ids), len(c_ids)), -1, dtype=np.int64)
        # duplicate edges keep their cheapest copy
        key = r_loc * len(c_ids) + c_loc
        by_key = np.lexsort((costs[part], key))
        keep = by_key[np.unique(key[by_key], return_index=True)[1]]
        dense[r_loc[keep], c_loc[keep]] = costs[part][keep]
        edge_at[r_loc[keep], c_loc[keep]] = part[keep]
        ri, ci = linear_sum_assignment(dense)
        sel = edge_at[ri, ci]
        chosen.append(sel[sel >= 0])
    return np.sort(np.concatenate(chosen))


def min_weight_max_matching(
    candidates: Iterable[MatchCandidate],
    left: Optional[Iterable[Hashable]] = None,
    right: Optional[Iterable[Hashable]] = None,
) -> set[tuple[Hashable, Hashable]]:
    """Maximum-cardinality matching of minimum total cost over ``candidates``.

    ``left`` and ``right`` are the prediction and ground-truth vertex sets;
    they default to the vertices mentioned by the candidates. The result is a
    set of ``(pred_id, gt_id)`` pairs and is deterministic for a given input.
    """
    candidates = list(candidates)
    left_ids = sorted(set(left) if left is not None else {c.pred_id for c in candidates}, key=repr)
    right_ids = sorted(set(right) if right is not None else {c.gt_id for c in candidates}, key=repr)
    li = {v: i for i, v in enumerate(left_ids)}
    ri = {v: i for i, v in enumerate(right_ids)}
    for c in candidates:
        if c.pred_id not in li or c.gt_id not in ri:
            raise KeyError(f"candidate {c} references a vertex outside the given sets")
        if not c.cost >= 0:
            raise ValueError(f"candidate cost must be >= 0, got {c.cost}")
    rows = np.array([li[c.pred_id] for c in candidates], dtype=np.int64)
    cols = np.array([ri[c.gt_id] for c in candidates], dtype=np.int64)
    costs = np.array([c.cost for c in candidates], dtype=np.float64)
    sel = match_edges(rows, cols, costs, len(left_ids), len(right_ids))
    return {(left_ids[rows[k]], right_ids[cols[k]]) for k in sel}


def pr_curve(units: Iterable[tuple[float, bool]], total_gt: int) -> tuple[PRPoint, ...]:
    """Cumulative PR points, one per distinct score, in descending score order.

    With no scored units the curve is the single point ``tp = fp = 0``.
    """
    if total_gt < 0:
        raise ValueError("total_gt must be >= 0")
    units = list(units)
    if not units:
        return (PRPoint(float("inf"), 0, 0, total_gt),)
    scores = np.array([u[0] for u in units], dtype=np.float64)
    hits = np.array([bool(u[1]) for u in units])
    order = np.argsort(-scores, kind="stable")
    scores, hits = scores[order], hits[order]
    tp = np.cumsum(hits)
    fp = np.cumsum(~hits)
    last = np.flatnonzero(np.append(scores[1:] != scores[:-1], True))
    if tp[-1] > total_gt:
        raise ValueError(f"{int(tp[-1])} true positives exceed {total_gt} ground-truth units")
    return tuple(
        PRPoint(float(scores[i]), int(tp[i]), int(fp[i]), int(total_gt - tp[i])) for i in last
    )


def average_precision(curve: Sequence[PRPoint]) -> float:
    """101-point interpolated AP.

    For each recall level r in {0, 0.01, ..., 1} take the best precision among
    curve points with recall >= r (0 when none), then average. Points without
    any predictions are skipped; their precision is 1 only by convention.
    """
    pts = [p for p in curve if p.tp + p.fp > 0]
    if not pts:
        return 0.0
    recall = np.array([p.recall for p in pts])
    precision = np.array([p.precision for p in pts])
    order = np.argsort(recall, kind="stable")
    recall, precision = recall[order], precision[order]
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, RECALL_GRID, side="left")
    sampled = np.where(idx < len(recall), envelope[np.minimum(idx, len(recall) - 1)], 0.0)
    return float(np.mean(sampled))


def ap_from_units(
    units: Iterable[tuple[float, bool]],
    total_gt: int,
    threshold: float,
    metric_name: str,
    trace: tuple = (),
) -> APResult:
    curve = pr_curve(units, total_gt)
    return APResult(average_precision(curve), curve, threshold, metric_name, trace)

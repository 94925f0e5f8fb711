"""Slow, obviously-correct reference implementations used by the tests."""

from functools import lru_cache
import math


def best_matching(n_left, n_right, edges):
    """Exhaustive max-cardinality, min-cost matching.

    ``edges`` maps (i, j) to a cost. Every left vertex either stays unmatched
    or takes one unused right vertex; all choices are enumerated through a
    memoised search over (left index, used-right bitmask).
    Returns (cardinality, cost).
    """
    adj = [[(j, c) for (i2, j), c in sorted(edges.items()) if i2 == i] for i in range(n_left)]

    @lru_cache(maxsize=None)
    def go(i, used):
        if i == n_left:
            return (0, 0.0)
        best = go(i + 1, used)
        for j, c in adj[i]:
            if used >> j & 1:
                continue
            k, s = go(i + 1, used | (1 << j))
            cand = (k + 1, s + c)
            if cand[0] > best[0] or (cand[0] == best[0] and cand[1] < best[1]):
                best = cand
        return best

    return go(0, 0)


def ap_101(points):
    """Interpolated AP from (recall, precision) pairs, one grid level at a time."""
    total = 0.0
    for i in range(101):
        r = i / 100
        ps = [p for rr, p in points if rr >= r]
        total += max(ps) if ps else 0.0
    return total / 101


def seg_distance(p, a, b):
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    t = 0.0 if den == 0 else max(0.0, min(1.0, ((p[0] - ax) * dx + (p[1] - ay) * dy) / den))
    return math.hypot(p[0] - ax - t * dx, p[1] - ay - t * dy)


def undirected_angle(a, b):
    return math.degrees(math.atan2(b[1] - a[1], b[0] - a[0])) % 180.0


def angle_gap(a, b):
    d = abs(a - b) % 180.0
    return min(d, 180.0 - d)


def box_iou(a, b):
    ax0, ay0, aw, ah = a
    bx0, by0, bw, bh = b
    iw = max(0.0, min(ax0 + aw, bx0 + bw) - max(ax0, bx0))
    ih = max(0.0, min(ay0 + ah, by0 + bh) - max(ay0, by0))
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0 else 0.0


def line_ap_rounds(gt_segments, pred_segments, dist_thr, orient_thr):
    """Per-score-group matching of single-chord segments.

    ``gt_segments`` are ((x0, y0), (x1, y1)) pairs, ``pred_segments`` add a
    score: (a, b, score). Returns [(score, n_matched, matched_cost)] in
    descending score order, solving each group exhaustively.
    """
    taken = set()
    rounds = []
    for score in sorted({s for _, _, s in pred_segments}, reverse=True):
        group = [(a, b) for a, b, s in pred_segments if s == score]
        free = [j for j in range(len(gt_segments)) if j not in taken]
        edges = {}
        for i, (pa, pb) in enumerate(group):
            po = undirected_angle(pa, pb)
            for k, j in enumerate(free):
                ga, gb = gt_segments[j]
                center = ((ga[0] + gb[0]) / 2, (ga[1] + gb[1]) / 2)
                d = seg_distance(center, pa, pb)
                if d < dist_thr and angle_gap(po, undirected_angle(ga, gb)) < orient_thr:
                    edges[(i, k)] = d
        card, cost = best_matching(len(group), len(free), edges)
        # with continuous random costs the optimum is unique almost surely, so
        # the GT set carried into later rounds is well defined
        rounds.append((score, card, cost, edges, free))
        if card:
            taken |= _one_optimal_cover(len(group), free, edges, card, cost)
    return [(s, k, c) for s, k, c, _, _ in rounds]


def _one_optimal_cover(n_left, free, edges, card, cost):
    """GT ids used by the first optimal matching found."""
    best = None

    def rec(i, used, k, s, chosen):
        nonlocal best
        if len(chosen) + (n_left - i) < card:
            return
        if i == n_left:
            if k == card and abs(s - cost) < 1e-9 and best is None:
                best = set(chosen)
            return
        for (i2, j), c in sorted(edges.items()):
            if i2 == i and j not in used:
                rec(i + 1, used | {j}, k + 1, s + c, chosen + [free[j]])
                if best is not None:
                    return
        rec(i + 1, used, k, s, chosen)

    rec(0, frozenset(), 0, 0.0, [])
    return best or set()


def detection_units(gts, preds, thr, counted):
    """Plain-Python greedy COCO matching with neutral boxes.

    ``gts``: list of (xywh, iscrowd); ``counted``: parallel flags;
    ``preds``: list of (xywh, score) already sorted by descending score.
    """
    taken = [False] * len(gts)
    units = []
    for box, score in preds:
        best, best_iou = None, -1.0
        for j, (g, _) in enumerate(gts):
            if counted[j] and not taken[j]:
                v = box_iou(box, g)
                if v >= thr and v > best_iou:
                    best, best_iou = j, v
        if best is not None:
            taken[best] = True
            units.append((score, True))
            continue
        neutral, n_val = None, -1.0
        for j, (g, crowd) in enumerate(gts):
            if counted[j] or (taken[j] and not crowd):
                continue
            if crowd:
                ix = max(0.0, min(box[0] + box[2], g[0] + g[2]) - max(box[0], g[0]))
                iy = max(0.0, min(box[1] + box[3], g[1] + g[3]) - max(box[1], g[1]))
                v = ix * iy / (box[2] * box[3])
            else:
                v = box_iou(box, g)
            if v >= thr and v > n_val:
                neutral, n_val = j, v
        if neutral is not None:
            if not gts[neutral][1]:
                taken[neutral] = True
            continue
        units.append((score, False))
    return units


def brute_force_matching(n_left, n_right, edges):
    """Enumerate every matching explicitly; returns (cardinality, cost).

    Each left vertex in turn is left free or given each unused right vertex
    it has an edge to, so every partial injection is visited exactly once.
    """
    adj = [[(j, c) for (i2, j), c in edges.items() if i2 == i] for i in range(n_left)]
    best = [0, 0.0]

    def visit(i, used, k, s):
        if i == n_left:
            if k > best[0] or (k == best[0] and s < best[1]):
                best[0], best[1] = k, s
            return
        visit(i + 1, used, k, s)
        for j, c in adj[i]:
            if j not in used:
                used.add(j)
                visit(i + 1, used, k + 1, s + c)
                used.discard(j)

    visit(0, set(), 0, 0.0)
    return best[0], best[1]

"""2-D geometric primitives over image pixel coordinates.

Everything here is a pure function of its inputs. Polylines and polygons are
stored as ``(n, 2)`` float64 arrays of ``(x, y)`` pixel coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Optional, Sequence

import numpy as np
import shapely
from shapely.geometry import LineString
from shapely.geometry import Polygon as _ShapelyPolygon

__all__ = [
    "Polyline",
    "Polygon",
    "LineSegmentUnit",
    "GeometryError",
    "arc_length",
    "split_polyline",
    "point_to_segment_distance",
    "points_to_chain_distance",
    "orientation_diff",
    "chord_orientation",
    "resample_uniform",
    "point_in_polygon",
    "clip_polyline_outside",
    "buffer_polyline",
    "polygon_iou",
    "box_iou",
]


class GeometryError(ValueError):
    """Raised for geometrically invalid inputs (degenerate lines, bad polygons)."""


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GeometryError(f"expected an (n, 2) point array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GeometryError("coordinates must be finite")
    return arr


def _dedupe_consecutive(arr: np.ndarray) -> np.ndarray:
    if len(arr) < 2:
        return arr
    keep = np.ones(len(arr), dtype=bool)
    keep[1:] = np.any(arr[1:] != arr[:-1], axis=1)
    return arr[keep]


@dataclass(frozen=True, eq=False)
class Polyline:
    """Ordered chain of at least two distinct points, optionally scored.

    Use :meth:`from_points` to build one from raw coordinates; it drops
    consecutive duplicates and validates the result.
    """

    points: np.ndarray
    score: Optional[float] = None

    @classmethod
    def from_points(cls, points, score: Optional[float] = None) -> "Polyline":
        arr = _dedupe_consecutive(_as_points(points))
        if len(arr) < 2:
            raise GeometryError("polyline requires >= 2 points")
        if score is not None:
            score = float(score)
            if not (0.0 <= score <= 1.0):
                raise GeometryError(f"score must lie in [0, 1], got {score}")
        arr.setflags(write=False)
        return cls(arr, score)

    @property
    def length(self) -> float:
        return arc_length(self.points)

    def with_score(self, score: Optional[float]) -> "Polyline":
        return Polyline(self.points, score)

    def transformed(self, scale: float = 1.0, offset=(0.0, 0.0)) -> "Polyline":
        return Polyline.from_points(self.points * scale + np.asarray(offset), self.score)


def _shoelace(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


@dataclass(frozen=True, eq=False)
class Polygon:
    """Simple polygon, closed implicitly. ``holes`` is only set by buffering."""

    vertices: np.ndarray
    holes: tuple = field(default=())

    @classmethod
    def from_points(cls, points) -> "Polygon":
        arr = _dedupe_consecutive(_as_points(points))
        if len(arr) > 1 and np.all(arr[0] == arr[-1]):
            arr = arr[:-1]
        if len(arr) < 3:
            raise GeometryError("polygon requires >= 3 vertices")
        if abs(_shoelace(arr)) <= 0.0:
            raise GeometryError("polygon has zero area")
        if not _ShapelyPolygon(arr).is_valid:
            raise GeometryError("polygon is not simple")
        arr.setflags(write=False)
        return cls(arr)

    @property
    def area(self) -> float:
        return abs(_shoelace(self.vertices)) - sum(abs(_shoelace(h)) for h in self.holes)

    def to_shapely(self) -> _ShapelyPolygon:
        return _ShapelyPolygon(self.vertices, [h for h in self.holes])

    def transformed(self, scale: float = 1.0, offset=(0.0, 0.0)) -> "Polygon":
        off = np.asarray(offset, dtype=np.float64)
        return Polygon(self.vertices * scale + off, tuple(h * scale + off for h in self.holes))


@dataclass(frozen=True, eq=False)
class LineSegmentUnit:
    """Fixed-length piece of a polyline; the atomic matching unit of LineAP.

    ``points`` is the chord chain of the piece (start, interior vertices, end).
    """

    points: np.ndarray
    center: np.ndarray
    orientation: float
    length: float
    score: Optional[float]
    parent_id: Hashable = None
    frame_id: Hashable = None

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]


def arc_length(points: np.ndarray) -> float:
    return float(np.sum(np.hypot(*np.diff(points, axis=0).T)))


def chord_orientation(start, end) -> float:
    """Undirected orientation of the chord start->end in degrees, in [0, 180)."""
    dx = float(end[0]) - float(start[0])
    dy = float(end[1]) - float(start[1])
    angle = math.degrees(math.atan2(dy, dx)) % 180.0
    # -tiny % 180 rounds up to exactly 180.0
    return 0.0 if angle >= 180.0 else angle + 0.0


def _cumulative(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    seglens = np.hypot(*np.diff(points, axis=0).T)
    return seglens, np.concatenate([[0.0], np.cumsum(seglens)])


def _point_at(points, seglens, cum, s: np.ndarray) -> np.ndarray:
    """Points at arc-length positions ``s`` along the chain."""
    s = np.atleast_1d(np.asarray(s, dtype=np.float64))
    idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(seglens) - 1)
    t = np.clip((s - cum[idx]) / seglens[idx], 0.0, 1.0)
    p0 = points[idx]
    return p0 + t[:, None] * (points[idx + 1] - p0)


def _split_arrays(points: np.ndarray, seg_len: float, merge_fraction: float):
    """Vectorised core of :func:`split_polyline`.

    Returns ``(cuts, cut_pts, centers, chord_a, chord_b, chord_owner)``: arc
    positions of the piece boundaries, the boundary points, the arc-length
    midpoints, and the chords of all pieces tagged with their piece index.
    """
    if not seg_len > 0:
        raise GeometryError(f"seg_len must be > 0, got {seg_len}")
    seglens, cum = _cumulative(points)
    total = float(cum[-1])
    if not total > 0:
        raise GeometryError("cannot split a zero-length polyline")

    n_full = int(math.floor(total / seg_len))
    breaks = seg_len * np.arange(1, n_full + 1, dtype=np.float64)
    breaks = breaks[breaks < total]
    if len(breaks) and total - breaks[-1] < merge_fraction * seg_len:
        breaks = breaks[:-1]
    cuts = np.concatenate([[0.0], breaks, [total]])
    cut_pts = _point_at(points, seglens, cum, cuts)
    cut_pts[0], cut_pts[-1] = points[0], points[-1]
    centers = _point_at(points, seglens, cum, 0.5 * (cuts[:-1] + cuts[1:]))

    inner = np.flatnonzero(~np.isin(cum, cuts))
    pos = np.concatenate([cuts, cum[inner]])
    pts = np.vstack([cut_pts, points[inner]])
    order = np.argsort(pos, kind="stable")
    pos, pts = pos[order], pts[order]
    owner = np.clip(np.searchsorted(cuts, 0.5 * (pos[:-1] + pos[1:]), side="right") - 1,
                    0, len(cuts) - 2)
    return cuts, cut_pts, centers, pts[:-1], pts[1:], owner


def split_polyline(
    line: Polyline,
    seg_len: float,
    merge_fraction: float = 0.25,
    parent_id: Hashable = None,
    frame_id: Hashable = None,
) -> list[LineSegmentUnit]:
    """Partition ``line`` into consecutive pieces of arc length ``seg_len``.

    The last piece may be shorter. A trailing remainder shorter than
    ``merge_fraction * seg_len`` is absorbed by the previous piece, so no unit
    is too short to carry a usable orientation.
    """
    cuts, cut_pts, centers, chord_a, chord_b, owner = _split_arrays(
        line.points, seg_len, merge_fraction
    )
    units = []
    for i in range(len(cuts) - 1):
        sel = owner == i
        chain = np.vstack([chord_a[sel], chord_b[sel][-1:]])
        chain.setflags(write=False)
        units.append(
            LineSegmentUnit(
                points=chain,
                center=centers[i],
                orientation=chord_orientation(cut_pts[i], cut_pts[i + 1]),
                length=float(cuts[i + 1] - cuts[i]),
                score=line.score,
                parent_id=parent_id,
                frame_id=frame_id,
            )
        )
    return units


def points_to_chain_distance(points: np.ndarray, chain: np.ndarray) -> np.ndarray:
    """Distance from each of ``points`` (m, 2) to the chord chain ``chain`` (k, 2)."""
    points = np.atleast_2d(points)
    a = chain[:-1]
    ab = chain[1:] - a
    denom = np.einsum("ij,ij->i", ab, ab)
    ap = points[:, None, :] - a[None, :, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.einsum("mkj,kj->mk", ap, ab) / denom
    t = np.clip(np.nan_to_num(t, nan=0.0), 0.0, 1.0)
    diff = ap - t[..., None] * ab[None, :, :]
    return np.min(np.hypot(diff[..., 0], diff[..., 1]), axis=1)


def point_to_segment_distance(p, seg) -> float:
    """Euclidean distance from ``p`` to the nearest point of ``seg``.

    ``seg`` may be a :class:`LineSegmentUnit`, a :class:`Polyline` or a raw
    chain of points; every chord of the chain is considered.
    """
    chain = seg.points if hasattr(seg, "points") else _as_points(seg)
    return float(points_to_chain_distance(np.asarray(p, dtype=np.float64)[None, :], chain)[0])


def orientation_diff(a: float, b: float) -> float:
    """Smallest angle between two undirected orientations, in [0, 90]."""
    d = abs(a - b) % 180.0
    return min(d, 180.0 - d)


def resample_uniform(line: Polyline, n: int) -> np.ndarray:
    """``n`` points at equal arc-length spacing, endpoints included."""
    if n < 2:
        raise GeometryError(f"need n >= 2 samples, got {n}")
    points = line.points
    seglens, cum = _cumulative(points)
    out = _point_at(points, seglens, cum, cum[-1] * np.arange(n) / (n - 1))
    out[0], out[-1] = points[0], points[-1]
    return out


def _boundary_distance(p: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    ring = np.vstack([vertices, vertices[:1]])
    return points_to_chain_distance(p, ring)


def point_in_polygon(points, polygon: Polygon, tol: float = 1e-9) -> np.ndarray:
    """True where a point lies strictly inside ``polygon`` (boundary excluded)."""
    p = np.atleast_2d(np.asarray(points, dtype=np.float64))

    def _inside_ring(ring):
        x, y = p[:, 0:1], p[:, 1:2]
        x0, y0 = ring[:, 0], ring[:, 1]
        x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
        straddle = (y0 > y) != (y1 > y)
        with np.errstate(invalid="ignore", divide="ignore"):
            xcross = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        return (np.count_nonzero(straddle & (x < xcross), axis=1) % 2) == 1

    inside = _inside_ring(polygon.vertices)
    for hole in polygon.holes:
        inside &= ~_inside_ring(hole)
    scale = max(1.0, float(np.max(np.abs(polygon.vertices))))
    on_edge = _boundary_distance(p, polygon.vertices) <= tol * scale
    for hole in polygon.holes:
        on_edge |= _boundary_distance(p, hole) <= tol * scale
    return inside & ~on_edge


def _cut_params(a: np.ndarray, b: np.ndarray, ring: np.ndarray):
    """Where chords a[i]->b[i] meet the edges of ``ring``.

    Returns ``(chord_index, t)`` arrays with t in (0, 1). Collinear overlaps
    contribute the ring vertices lying on the chord.
    """
    d = b - a
    q0 = ring
    e = np.roll(ring, -1, axis=0) - q0
    w = q0[None, :, :] - a[:, None, :]
    denom = d[:, None, 0] * e[None, :, 1] - d[:, None, 1] * e[None, :, 0]
    cross_we = w[..., 0] * e[None, :, 1] - w[..., 1] * e[None, :, 0]
    cross_wd = w[..., 0] * d[:, None, 1] - w[..., 1] * d[:, None, 0]
    dd = np.einsum("ij,ij->i", d, d)[:, None]
    proper = np.abs(denom) > 1e-12 * dd
    safe = np.where(proper, denom, 1.0)
    t = cross_we / safe
    u = cross_wd / safe
    hit = proper & (t > 0) & (t < 1) & (u >= 0) & (u <= 1)
    ci, _ = np.nonzero(hit)
    chord_idx, ts = [ci], [t[hit]]
    collinear = ~proper & (np.abs(cross_wd) <= 1e-12 * dd)
    if collinear.any():
        ci, ei = np.nonzero(collinear)
        for q in (q0[ei], q0[ei] + e[ei]):
            tq = np.einsum("ij,ij->i", q - a[ci], d[ci]) / dd[ci, 0]
            ok = (tq > 0) & (tq < 1)
            chord_idx.append(ci[ok])
            ts.append(tq[ok])
    return np.concatenate(chord_idx), np.concatenate(ts)


def _bbox_overlap(lo_a, hi_a, lo_b, hi_b) -> bool:
    return bool(np.all(lo_a <= hi_b) and np.all(lo_b <= hi_a))


def clip_polyline_outside(line: Polyline, regions: Sequence[Polygon]) -> list[Polyline]:
    """Maximal pieces of ``line`` lying outside every polygon in ``regions``.

    Chords crossing a region boundary are cut at the crossing. Pieces inherit
    the score of ``line``; degenerate pieces are dropped.
    """
    pts = line.points
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    regions = [r for r in regions
               if _bbox_overlap(lo, hi, r.vertices.min(axis=0), r.vertices.max(axis=0))]
    if not regions:
        return [line]
    a, b = pts[:-1], pts[1:]
    n = len(a)
    chord_idx = [np.arange(n), np.arange(n)]
    ts = [np.zeros(n), np.ones(n)]
    for region in regions:
        for ring in (region.vertices, *region.holes):
            ci, t = _cut_params(a, b, ring)
            chord_idx.append(ci)
            ts.append(t)
    chord_idx = np.concatenate(chord_idx)
    ts = np.concatenate(ts)
    order = np.lexsort((ts, chord_idx))
    chord_idx, ts = chord_idx[order], ts[order]
    keep = np.r_[True, (np.diff(chord_idx) != 0) | (np.diff(ts) != 0)]
    chord_idx, ts = chord_idx[keep], ts[keep]

    # pieces between consecutive parameters on the same chord
    same = chord_idx[1:] == chord_idx[:-1]
    pc = chord_idx[:-1][same]
    t0, t1 = ts[:-1][same], ts[1:][same]
    d = b[pc] - a[pc]
    p0 = np.where((t0 == 0.0)[:, None], a[pc], a[pc] + t0[:, None] * d)
    p1 = np.where((t1 == 1.0)[:, None], b[pc], a[pc] + t1[:, None] * d)
    mids = a[pc] + (0.5 * (t0 + t1))[:, None] * d
    gone = np.zeros(len(pc), dtype=bool)
    for region in regions:
        gone |= point_in_polygon(mids, region)

    out = []
    run: list[np.ndarray] = []
    for k in range(len(pc)):
        if gone[k]:
            if run:
                out.append(run)
                run = []
            continue
        if not run:
            run = [p0[k]]
        run.append(p1[k])
    if run:
        out.append(run)

    result = []
    for r in out:
        arr = _dedupe_consecutive(np.asarray(r))
        if len(arr) >= 2 and arc_length(arr) > 0:
            arr.setflags(write=False)
            result.append(Polyline(arr, line.score))
    return result


def buffer_polyline(line: Polyline, half_width: float) -> Polygon:
    """Fixed-width band around ``line``: flat caps, mitre joins with bevel fallback."""
    if not half_width > 0:
        raise GeometryError(f"half_width must be > 0, got {half_width}")
    geom = LineString(line.points).buffer(
        half_width, cap_style="flat", join_style="mitre", mitre_limit=2.0
    )
    if geom.geom_type == "MultiPolygon":
        geom = max(geom.geoms, key=lambda g: g.area)
    shell = np.asarray(geom.exterior.coords)[:-1]
    holes = tuple(np.asarray(r.coords)[:-1] for r in geom.interiors)
    return Polygon(shell, holes)


def polygon_iou(a: Polygon, b: Polygon) -> float:
    """Area IoU of two polygons; 0 if either is degenerate."""
    pa, pb = a.to_shapely(), b.to_shapely()
    union = shapely.union(pa, pb).area
    if not union > 0 or pa.area <= 0 or pb.area <= 0:
        return 0.0
    return float(min(1.0, shapely.intersection(pa, pb).area / union))


def box_iou(a, b) -> float:
    """IoU of two axis-aligned ``(x, y, w, h)`` boxes."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    iw = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    ih = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    if union <= 0:
        return 0.0
    return inter / union

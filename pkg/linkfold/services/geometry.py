"""Planar predicates: segment relations, circle intersections, classification.

Inner loops work on plain float tuples; numpy scalar arithmetic is an order
of magnitude slower for the pair scans done per sample.
"""
import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from linkfold.config import settings
from linkfold.errors import Coincident, DegenerateSegment, NoSolution
from linkfold.services.linkage import Configuration

logger = logging.getLogger(__name__)

Point = Tuple[float, float]


class SegmentRelation(str, Enum):
    DISJOINT = "disjoint"
    TOUCH_POINT = "touch-point"
    OVERLAP_SEGMENT = "overlap-segment"
    PROPER_CROSS = "proper-cross"


class Classification(str, Enum):
    EMBEDDED = "embedded"
    SELF_TOUCHING = "self-touching"
    CROSSING = "crossing"


class Segment(NamedTuple):
    start: Point
    end: Point


def _pt(p) -> Point:
    return (float(p[0]), float(p[1]))


def _seg(s) -> Tuple[Point, Point]:
    return _pt(s[0]), _pt(s[1])


def _cross(ax, ay, bx, by) -> float:
    return ax * by - ay * bx


def point_segment_distance(p, a, b) -> float:
    px, py = _pt(p)
    ax, ay = _pt(a)
    bx, by = _pt(b)
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    if denom == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / denom
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def _orientation(a: Point, b: Point, c: Point) -> int:
    v = _cross(b[0] - a[0], b[1] - a[1], c[0] - a[0], c[1] - a[1])
    return (v > 0) - (v < 0)


def _on_box(a: Point, b: Point, p: Point) -> bool:
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def _segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    o1, o2 = _orientation(p1, p2, q1), _orientation(p1, p2, q2)
    o3, o4 = _orientation(q1, q2, p1), _orientation(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _on_box(p1, p2, q1):
        return True
    if o2 == 0 and _on_box(p1, p2, q2):
        return True
    if o3 == 0 and _on_box(q1, q2, p1):
        return True
    return o4 == 0 and _on_box(q1, q2, p2)


def segment_distance(s1, s2) -> float:
    """Euclidean distance between two closed segments (0 when they meet)."""
    p1, p2 = _seg(s1)
    q1, q2 = _seg(s2)
    if _segments_intersect(p1, p2, q1, q2):
        return 0.0
    return min(
        point_segment_distance(p1, q1, q2),
        point_segment_distance(p2, q1, q2),
        point_segment_distance(q1, p1, p2),
        point_segment_distance(q2, p1, p2),
    )


def segment_relation(s1, s2, eps: Optional[float] = None) -> SegmentRelation:
    """Classifies how two closed segments meet, with contact tolerance eps.

    Symmetric in its arguments.
    """
    eps = settings.CLASSIFY_EPS if eps is None else eps
    (px, py), (p2x, p2y) = _seg(s1)
    (qx, qy), (q2x, q2y) = _seg(s2)
    rx, ry = p2x - px, p2y - py
    sx, sy = q2x - qx, q2y - qy
    len_r = math.hypot(rx, ry)
    len_s = math.hypot(sx, sy)
    if len_r <= eps or len_s <= eps:
        raise DegenerateSegment("Segment shorter than the contact tolerance")

    # collinear: every endpoint within eps of the other segment's line
    if (
        abs(_cross(rx, ry, qx - px, qy - py)) <= eps * len_r
        and abs(_cross(rx, ry, q2x - px, q2y - py)) <= eps * len_r
        and abs(_cross(sx, sy, px - qx, py - qy)) <= eps * len_s
        and abs(_cross(sx, sy, p2x - qx, p2y - qy)) <= eps * len_s
    ):
        ux, uy = rx / len_r, ry / len_r
        t0 = (qx - px) * ux + (qy - py) * uy
        t1 = (q2x - px) * ux + (q2y - py) * uy
        overlap = min(len_r, max(t0, t1)) - max(0.0, min(t0, t1))
        if overlap > eps:
            return SegmentRelation.OVERLAP_SEGMENT
        if overlap >= -eps:
            return SegmentRelation.TOUCH_POINT
        return SegmentRelation.DISJOINT

    denom = _cross(rx, ry, sx, sy)
    if abs(denom) > eps * len_r * len_s:
        wx, wy = qx - px, qy - py
        t = _cross(wx, wy, sx, sy) / denom
        u = _cross(wx, wy, rx, ry) / denom
        if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
            xx, xy = px + t * rx, py + t * ry
            nearest = min(
                math.hypot(xx - px, xy - py),
                math.hypot(xx - p2x, xy - p2y),
                math.hypot(xx - qx, xy - qy),
                math.hypot(xx - q2x, xy - q2y),
            )
            if nearest > eps:
                return SegmentRelation.PROPER_CROSS
            return SegmentRelation.TOUCH_POINT

    p, p2, q, q2 = (px, py), (p2x, p2y), (qx, qy), (q2x, q2y)
    gap = min(
        point_segment_distance(p, q, q2),
        point_segment_distance(p2, q, q2),
        point_segment_distance(q, p, p2),
        point_segment_distance(q2, p, p2),
    )
    return SegmentRelation.DISJOINT if gap > eps else SegmentRelation.TOUCH_POINT


@dataclass(frozen=True)
class Contact:
    """A reason a configuration is not embedded.

    kind "edges" pairs two bar indices; kind "vertex" pairs a vertex index
    (first) with a bar it lies on (second).
    """
    kind: str
    first: int
    second: int
    relation: SegmentRelation


def _bars(config: Configuration) -> List[Tuple[Point, Point]]:
    pts = config.points()
    n = len(pts)
    return [(pts[i], pts[(i + 1) % n]) for i in range(n)]


def contacts(config: Configuration, eps: Optional[float] = None) -> List[Contact]:
    eps = settings.CLASSIFY_EPS if eps is None else eps
    n = config.n
    bars = _bars(config)
    found: List[Contact] = []

    for i in range(n):
        for j in range(i + 1, n):
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            rel = segment_relation(bars[i], bars[j], eps)
            if rel is SegmentRelation.PROPER_CROSS:
                found.append(Contact("edges", i, j, rel))
            elif adjacent:
                # adjacent bars always share a joint; only folding back counts
                if rel is SegmentRelation.OVERLAP_SEGMENT:
                    found.append(Contact("edges", i, j, rel))
            elif rel is not SegmentRelation.DISJOINT:
                found.append(Contact("edges", i, j, rel))

    # joints resting on a bar they do not belong to
    pts = config.points()
    for k in range(n):
        for i in range(n):
            if i == k or i == (k - 1) % n:
                continue
            if point_segment_distance(pts[k], *bars[i]) <= eps:
                found.append(Contact("vertex", k, i, SegmentRelation.TOUCH_POINT))

    return found


def classify(config: Configuration, eps: Optional[float] = None) -> Classification:
    found = contacts(config, eps)
    if any(c.relation is SegmentRelation.PROPER_CROSS for c in found):
        return Classification.CROSSING
    if found:
        return Classification.SELF_TOUCHING
    return Classification.EMBEDDED


def circle_circle(c1, r1: float, c2, r2: float, eps: Optional[float] = None) -> Tuple[np.ndarray, ...]:
    """Intersection points of two circles.

    Two points come back with the one left of the oriented line c1->c2 first.
    """
    eps = settings.ABS_TOL if eps is None else eps
    x1, y1 = _pt(c1)
    x2, y2 = _pt(c2)
    dx, dy = x2 - x1, y2 - y1
    d = math.hypot(dx, dy)

    if d <= eps:
        if abs(r1 - r2) <= eps:
            raise Coincident("Concentric circles of equal radius")
        raise NoSolution("Concentric circles of different radii")
    if d > r1 + r2 + eps or d < abs(r1 - r2) - eps:
        raise NoSolution(f"Circles do not meet: d={d:.6g}, r1={r1:.6g}, r2={r2:.6g}")

    ux, uy = dx / d, dy / d
    a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d)

    if abs(d - (r1 + r2)) <= eps or abs(d - abs(r1 - r2)) <= eps:
        along = math.copysign(r1, a)
        return (np.array([x1 + along * ux, y1 + along * uy]),)

    h = math.sqrt(max(0.0, (r1 - a) * (r1 + a)))
    bx, by = x1 + a * ux, y1 + a * uy
    nx, ny = -uy, ux
    return (
        np.array([bx + h * nx, by + h * ny]),
        np.array([bx - h * nx, by - h * ny]),
    )


def triple_folds(config: Configuration, eps: Optional[float] = None) -> List[int]:
    """Start indices i where bars i, i+1, i+2 lie folded on one line.

    Folded means the middle bar runs back against both neighbours.
    """
    eps = settings.CLASSIFY_EPS if eps is None else eps
    pts = config.points()
    n = len(pts)
    starts = []
    for i in range(n):
        a0, a1, a2, a3 = (pts[(i + k) % n] for k in range(4))
        ex, ey = a1[0] - a0[0], a1[1] - a0[1]
        length = math.hypot(ex, ey)
        if length <= eps:
            continue
        on_line = all(
            abs(_cross(ex, ey, p[0] - a0[0], p[1] - a0[1])) <= eps * length for p in (a2, a3)
        )
        if not on_line:
            continue
        e1 = (a2[0] - a1[0], a2[1] - a1[1])
        e2 = (a3[0] - a2[0], a3[1] - a2[1])
        if ex * e1[0] + ey * e1[1] < 0 and e1[0] * e2[0] + e1[1] * e2[1] < 0:
            starts.append(i)
    return starts


def _inside_convex(p: Point, polygon: Sequence[Point]) -> bool:
    sign = 0
    k = len(polygon)
    for i in range(k):
        a, b = polygon[i], polygon[(i + 1) % k]
        o = _orientation(a, b, p)
        if o == 0:
            continue
        if sign == 0:
            sign = o
        elif o != sign:
            return False
    return True


def _polygon_edges(polygon: Sequence[Point]):
    k = len(polygon)
    return [(polygon[i], polygon[(i + 1) % k]) for i in range(k)]


def convex_polygon_distance(poly_a, poly_b) -> float:
    """Distance between two convex polygons; 0 when they overlap."""
    a = [_pt(p) for p in poly_a]
    b = [_pt(p) for p in poly_b]
    if _inside_convex(a[0], b) or _inside_convex(b[0], a):
        return 0.0
    return min(segment_distance(e, f) for e in _polygon_edges(a) for f in _polygon_edges(b))


def segment_polygon_distance(segment, polygon) -> float:
    p, q = _seg(segment)
    poly = [_pt(v) for v in polygon]
    if _inside_convex(p, poly) or _inside_convex(q, poly):
        return 0.0
    return min(segment_distance((p, q), e) for e in _polygon_edges(poly))


def point_polygon_distance(point, polygon) -> float:
    p = _pt(point)
    poly = [_pt(v) for v in polygon]
    if _inside_convex(p, poly):
        return 0.0
    return min(point_segment_distance(p, *e) for e in _polygon_edges(poly))

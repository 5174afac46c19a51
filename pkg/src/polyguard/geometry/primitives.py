"""Low-level planar predicates and segment operations.

Coordinates are doubles; sign-sensitive predicates fall back to exact
rational arithmetic (floats are exact binary rationals) whenever the
floating-point result is too close to zero to trust.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Sequence, Tuple

Point = Tuple[float, float]

# Relative error bound for a 2x2 determinant of differences (Shewchuk-style,
# deliberately loose: falling back to exact arithmetic is cheap here).
_ORIENT_EPS = 1e-12


def orient(a: Point, b: Point, c: Point) -> int:
    """Sign of the cross product (b - a) x (c - a): +1 left turn / CCW,
    -1 right turn, 0 collinear. Exact."""
    det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    scale = (
        abs(b[0] - a[0]) * abs(c[1] - a[1]) + abs(b[1] - a[1]) * abs(c[0] - a[0])
    )
    if abs(det) > _ORIENT_EPS * scale:
        return 1 if det > 0 else -1
    if det == 0.0 and scale == 0.0:
        return 0
    # Exact fallback.
    ax, ay = Fraction(a[0]), Fraction(a[1])
    det_exact = (Fraction(b[0]) - ax) * (Fraction(c[1]) - ay) - (
        Fraction(b[1]) - ay
    ) * (Fraction(c[0]) - ax)
    if det_exact > 0:
        return 1
    if det_exact < 0:
        return -1
    return 0


def cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def dot(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[0] - o[0]) + (a[1] - o[1]) * (b[1] - o[1])


def dist(a: Point, b: Point) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def on_segment(a: Point, b: Point, p: Point) -> bool:
    """True iff p lies on the closed segment ab (exact collinearity test)."""
    if orient(a, b, p) != 0:
        return False
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def segments_cross_properly(a: Point, b: Point, c: Point, d: Point) -> bool:
    """True iff open segments ab and cd intersect transversally (a single
    interior point of both)."""
    o1 = orient(a, b, c)
    o2 = orient(a, b, d)
    o3 = orient(c, d, a)
    o4 = orient(c, d, b)
    return o1 * o2 < 0 and o3 * o4 < 0


def segments_touch(a: Point, b: Point, c: Point, d: Point) -> bool:
    """True iff closed segments ab and cd share at least one point."""
    if segments_cross_properly(a, b, c, d):
        return True
    return (
        on_segment(a, b, c)
        or on_segment(a, b, d)
        or on_segment(c, d, a)
        or on_segment(c, d, b)
    )


def segment_intersection_params(
    a: Point, b: Point, c: Point, d: Point
) -> Optional[Tuple[float, float]]:
    """Parameter interval [t0, t1] along ab (0 at a, 1 at b) where ab meets
    the closed segment cd; None when disjoint. A transversal or touching
    intersection gives t0 == t1; a collinear overlap gives t0 < t1."""
    o1 = orient(c, d, a)
    o2 = orient(c, d, b)
    if o1 == 0 and o2 == 0:
        # Collinear: project cd onto ab.
        abx, aby = b[0] - a[0], b[1] - a[1]
        denom = abx * abx + aby * aby
        if denom == 0.0:
            return (0.0, 0.0) if on_segment(c, d, a) else None
        tc = ((c[0] - a[0]) * abx + (c[1] - a[1]) * aby) / denom
        td = ((d[0] - a[0]) * abx + (d[1] - a[1]) * aby) / denom
        lo, hi = min(tc, td), max(tc, td)
        lo, hi = max(lo, 0.0), min(hi, 1.0)
        if lo > hi:
            return None
        return (lo, hi)
    o3 = orient(a, b, c)
    o4 = orient(a, b, d)
    if o1 * o2 > 0 or o3 * o4 > 0:
        return None
    # Proper or touching intersection: solve for t along ab.
    denom = (b[0] - a[0]) * (d[1] - c[1]) - (b[1] - a[1]) * (d[0] - c[0])
    if denom == 0.0:
        # Touching at an endpoint with near-parallel segments.
        for p, t in ((a, 0.0), (b, 1.0)):
            if on_segment(c, d, p):
                return (t, t)
        for p in (c, d):
            if on_segment(a, b, p):
                t = _project_param(a, b, p)
                return (t, t)
        return None
    t = ((c[0] - a[0]) * (d[1] - c[1]) - (c[1] - a[1]) * (d[0] - c[0])) / denom
    t = min(1.0, max(0.0, t))
    return (t, t)


def _project_param(a: Point, b: Point, p: Point) -> float:
    abx, aby = b[0] - a[0], b[1] - a[1]
    denom = abx * abx + aby * aby
    if denom == 0.0:
        return 0.0
    return min(1.0, max(0.0, ((p[0] - a[0]) * abx + (p[1] - a[1]) * aby) / denom))


def closest_point_on_segment(a: Point, b: Point, p: Point) -> Point:
    t = _project_param(a, b, p)
    return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))


def lerp(a: Point, b: Point, t: float) -> Point:
    return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))


def polygon_signed_area(points: Sequence[Point]) -> float:
    """Shoelace area: positive for CCW rings."""
    total = 0.0
    n = len(points)
    for i in range(n):
        x1, y1 = points[i]
        x2, y2 = points[(i + 1) % n]
        total += x1 * y2 - x2 * y1
    return 0.5 * total


def point_in_triangle(p: Point, a: Point, b: Point, c: Point) -> bool:
    """Closed containment: boundary counts as inside."""
    o1 = orient(a, b, p)
    o2 = orient(b, c, p)
    o3 = orient(c, a, p)
    has_neg = o1 < 0 or o2 < 0 or o3 < 0
    has_pos = o1 > 0 or o2 > 0 or o3 > 0
    return not (has_neg and has_pos)

"""Visibility inside a simple polygon.

Two routes are provided: a segment test (the ground truth used everywhere)
and full visibility polygons computed by triangular expansion over the dual
tree of a triangulation.
"""

from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .polygon import Polygon
from .primitives import (
    Point,
    dist,
    lerp,
    orient,
    point_in_triangle,
    segment_intersection_params,
)
from .triangulation import TriangulationGraph

_PARAM_EPS = 1e-12


def edge_arrays(polygon: Polygon) -> Tuple[np.ndarray, np.ndarray]:
    """Boundary edges as (n,2) arrays of start and end points."""
    v = np.asarray(polygon.vertices, dtype=float)
    return v, np.roll(v, -1, axis=0)


def segments_visible_bulk(
    polygon: Polygon,
    starts: np.ndarray,
    ends: np.ndarray,
    arrays: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> np.ndarray:
    """Vectorized segment-visibility for m segments (endpoints assumed inside
    the polygon). Clean crossings/misses are decided in one numpy pass;
    touching cases fall back to the exact scalar test."""
    if arrays is None:
        arrays = edge_arrays(polygon)
    a, b = arrays
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    px, py = starts[:, 0][:, None], starts[:, 1][:, None]
    qx, qy = ends[:, 0][:, None], ends[:, 1][:, None]
    ax, ay = a[:, 0][None, :], a[:, 1][None, :]
    bx, by = b[:, 0][None, :], b[:, 1][None, :]
    dx, dy = qx - px, qy - py
    oa = dx * (ay - py) - dy * (ax - px)
    ob = dx * (by - py) - dy * (bx - px)
    ex, ey = bx - ax, by - ay
    oc = ex * (py - ay) - ey * (px - ax)
    od = ex * (qy - ay) - ey * (qx - ax)
    scale = 1e-12 * (np.abs(oa) + np.abs(ob) + np.abs(oc) + np.abs(od) + 1e-300)
    crossing = (oa * ob < -scale) & (oc * od < -scale)
    touching = ~((oa * ob > scale) | (oc * od > scale))
    out = np.ones(len(starts), dtype=bool)
    has_cross = crossing.any(axis=1)
    out[has_cross] = False
    ambiguous = np.nonzero(touching.any(axis=1) & ~has_cross)[0]
    for k in ambiguous:
        out[k] = segment_visible(
            polygon, tuple(starts[k]), tuple(ends[k]), arrays, strict=False
        )
    return out


def segment_visible(
    polygon: Polygon,
    p: Point,
    q: Point,
    arrays: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    strict: bool = True,
) -> bool:
    """True iff the segment pq stays inside the closed polygon.

    Tangential contact with the boundary (grazing a vertex, running along an
    edge) counts as visible. strict=False skips the endpoint containment
    check (for internal points produced by floating-point constructions that
    may sit a hair outside).
    """
    if strict:
        polygon.require_inside(p, "segment endpoint")
        polygon.require_inside(q, "segment endpoint")
    if p == q:
        return True
    px, py = p
    qx, qy = q
    dx, dy = qx - px, qy - py
    verts = polygon.vertices
    n = polygon.n
    touch_idx: List[int] = []
    if n <= 24:
        # scalar loop beats numpy dispatch for small rings
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            oa = dx * (ay - py) - dy * (ax - px)
            ob = dx * (by - py) - dy * (bx - px)
            ex, ey = bx - ax, by - ay
            oc = ex * (py - ay) - ey * (px - ax)
            od = ex * (qy - ay) - ey * (qx - ax)
            scale = 1e-12 * (abs(oa) + abs(ob) + abs(oc) + abs(od) + 1e-300)
            if not (oa * ob > scale or oc * od > scale):
                touch_idx.append(i)
    else:
        if arrays is None:
            arrays = edge_arrays(polygon)
        a, b = arrays
        oa = dx * (a[:, 1] - py) - dy * (a[:, 0] - px)
        ob = dx * (b[:, 1] - py) - dy * (b[:, 0] - px)
        ex = b[:, 0] - a[:, 0]
        ey = b[:, 1] - a[:, 1]
        oc = ex * (py - a[:, 1]) - ey * (px - a[:, 0])
        od = ex * (qy - a[:, 1]) - ey * (qx - a[:, 0])
        scale = 1e-12 * (np.abs(oa) + np.abs(ob) + np.abs(oc) + np.abs(od) + 1e-300)
        touching = ~((oa * ob > scale) | (oc * od > scale))
        touch_idx = [int(i) for i in np.nonzero(touching)[0]]
    if not touch_idx:
        # No boundary contact at all; both endpoints inside means the whole
        # segment is inside.
        return True
    # Exact path: split pq at every boundary contact and probe the gaps.
    params: List[float] = [0.0, 1.0]
    for i in touch_idx:
        c, d = verts[i], verts[(i + 1) % n]
        hit = segment_intersection_params(p, q, c, d)
        if hit is not None:
            params.extend(hit)
    params.sort()
    for t0, t1 in zip(params, params[1:]):
        if t1 - t0 <= _PARAM_EPS:
            continue
        mid = lerp(p, q, 0.5 * (t0 + t1))
        if not polygon.contains(mid):
            return False
    return True


def segment_visible_pulled(
    polygon: Polygon,
    p: Point,
    q: Point,
    arrays: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    pull: float = 1e-9,
) -> bool:
    """Visibility test with both endpoints pulled slightly toward each other,
    so endpoints sitting exactly on vertices/edges take the fast path. For
    internal hot loops; grazing decisions within the pull distance may differ
    from the exact test."""
    d = dist(p, q)
    if d <= 4.0 * pull:
        return True
    ux, uy = (q[0] - p[0]) / d, (q[1] - p[1]) / d
    p2 = (p[0] + pull * ux, p[1] + pull * uy)
    q2 = (q[0] - pull * ux, q[1] - pull * uy)
    return segment_visible(polygon, p2, q2, arrays, strict=False)


# ---------------------------------------------------------------------------
# Visibility polygon by triangular expansion
# ---------------------------------------------------------------------------


def visibility_ring(tri: TriangulationGraph, p: Point) -> List[Point]:
    """Boundary of the region visible from p, as a CCW ring of points.

    Works for p anywhere in the closed polygon (interior, edge or vertex).
    """
    polygon = tri.polygon
    polygon.require_inside(p, "viewpoint")
    containing = [
        t
        for t in range(len(tri.triangles))
        if point_in_triangle(p, *tri.triangle_points(t))
    ]
    vs = polygon.vertices
    pieces: List[List[Point]] = []
    for t in containing:
        a, b, c = tri.triangles[t]
        for (u, v) in ((a, b), (b, c), (c, a)):
            pu, pv = vs[u], vs[v]
            # Skip edges through p (they subtend no angle).
            if orient(p, pu, pv) <= 0:
                continue
            piece: List[Point] = []
            _through_edge(tri, t, (u, v), pu, pv, p, piece)
            if piece:
                pieces.append(piece)

    def angle(pt: Point) -> float:
        return math.atan2(pt[1] - p[1], pt[0] - p[0])

    pieces.sort(key=lambda piece: angle(piece[0]))
    if polygon.on_boundary(p) and pieces:
        # Rotate so the ring starts after the exterior angular gap at p.
        gaps = []
        k = len(pieces)
        for i in range(k):
            end_a = angle(pieces[i][-1])
            start_next = angle(pieces[(i + 1) % k][0])
            gaps.append((start_next - end_a) % (2.0 * math.pi))
        cut = max(range(k), key=gaps.__getitem__)
        pieces = pieces[cut + 1 :] + pieces[: cut + 1]
    ring: List[Point] = []
    for piece in pieces:
        for pt in piece:
            if not ring or _far(ring[-1], pt):
                ring.append(pt)
    if polygon.on_boundary(p) and (not ring or _far(ring[-1], p)):
        ring.append(p)
    if len(ring) > 1 and not _far(ring[0], ring[-1]):
        ring.pop()
    return ring


def _through_edge(
    tri: TriangulationGraph,
    t: int,
    edge: Tuple[int, int],
    ca: Point,
    cb: Point,
    p: Point,
    out: List[Point],
) -> None:
    """Emit the part of the boundary visible from p through directed edge
    (u, v) of triangle t within the cone [dir(ca), dir(cb)]."""
    u, v = edge
    key = (u, v) if u < v else (v, u)
    neighbors = tri.triangles_of_diagonal(key)
    if len(neighbors) == 2:
        nxt = neighbors[0] if neighbors[0] != t else neighbors[1]
        _expand(tri, nxt, (u, v), ca, cb, p, out)
    else:
        out.append(ca)
        out.append(cb)


def _far(a: Point, b: Point) -> bool:
    return abs(a[0] - b[0]) > 1e-12 or abs(a[1] - b[1]) > 1e-12


def _expand(
    tri: TriangulationGraph,
    t: int,
    portal: Tuple[int, int],
    ca: Point,
    cb: Point,
    p: Point,
    out: List[Point],
) -> None:
    """Recurse through triangle t, entered through `portal` (directed so the
    sweep from ca to cb is CCW around p); emit visible boundary points."""
    u, v = portal
    vs = tri.polygon.vertices
    a, b, c = tri.triangles[t]
    w = next(x for x in (a, b, c) if x not in (u, v))
    for (e0, e1) in ((u, w), (w, v)):
        p0, p1 = vs[e0], vs[e1]
        clipped = _clip_to_cone(p, ca, cb, p0, p1)
        if clipped is None:
            continue
        q0, q1 = clipped
        _through_edge(tri, t, (e0, e1), q0, q1, p, out)


def _clip_to_cone(
    p: Point, ca: Point, cb: Point, u: Point, v: Point
) -> Optional[Tuple[Point, Point]]:
    """Sub-segment of uv whose directions from p lie in the CCW cone
    [dir(ca), dir(cb)] (cone < pi). Returns None when empty."""

    def _cross(o: Point, x: Point, y: Point) -> float:
        return (x[0] - o[0]) * (y[1] - o[1]) - (x[1] - o[1]) * (y[0] - o[0])

    lo, hi = 0.0, 1.0
    # Left of ray p->ca (inclusive): cross(p, ca, x) >= 0
    f0 = _cross(p, ca, u)
    f1 = _cross(p, ca, v)
    if f0 < 0.0 and f1 < 0.0:
        return None
    if f0 < 0.0:
        lo = max(lo, f0 / (f0 - f1))
    elif f1 < 0.0:
        hi = min(hi, f0 / (f0 - f1))
    # Right of ray p->cb (inclusive): cross(p, cb, x) <= 0
    g0 = _cross(p, cb, u)
    g1 = _cross(p, cb, v)
    if g0 > 0.0 and g1 > 0.0:
        return None
    if g0 > 0.0:
        lo = max(lo, g0 / (g0 - g1))
    elif g1 > 0.0:
        hi = min(hi, g0 / (g0 - g1))
    if lo >= hi:
        return None
    return (lerp(u, v, lo), lerp(u, v, hi))

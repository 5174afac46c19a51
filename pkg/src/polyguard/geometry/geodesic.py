"""Geodesic (shortest-path-inside-polygon) distances and offsets.

Shortest paths inside a simple polygon bend only at reflex vertices, so the
geodesic metric is computed over the vertex visibility graph. A distance
field from a polyline source decomposes exactly into:

  * direct zones: points that see the perpendicular foot on a source segment
    within range,
  * relay disks: visibility disks around vertices v with radius d - D(v),
    where D(v) is the geodesic distance from v to the source.

Offset regions are assembled from those pieces (arcs flattened), which keeps
this implementation independent of the grid-based oracles used in tests.
"""

from __future__ import annotations

import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import shapely
from shapely.geometry import Polygon as ShPolygon

from .polygon import Polygon
from .primitives import Point, closest_point_on_segment, dist
from .region import (
    Region,
    circle_ring,
    safe_difference,
    safe_intersection,
    safe_union_all,
)
from .triangulation import TriangulationGraph, triangulate
from .visibility import (
    edge_arrays,
    segment_visible,
    segment_visible_pulled,
    segments_visible_bulk,
    visibility_ring,
)

Segment = Tuple[Point, Point]


class GeodesicEngine:
    """Per-polygon shortest-path machinery with cached vertex metrics."""

    def __init__(self, polygon: Polygon, tri: Optional[TriangulationGraph] = None):
        self.polygon = polygon
        self.tri = tri if tri is not None else triangulate(polygon)
        self.arrays = edge_arrays(polygon)
        self._vertex_metric: Optional[np.ndarray] = None
        self._vis_rings: Dict[int, List[Point]] = {}
        self._vis_polys: Dict[int, ShPolygon] = {}
        self._source_dist_cache: Dict[tuple, np.ndarray] = {}
        self.reflex_ids = polygon.reflex_vertex_ids()
        self._vertex_of_point = {
            (x, y): i for i, (x, y) in enumerate(polygon.vertices)
        }

    # -- cached per-polygon structure ---------------------------------------

    def visible(self, p: Point, q: Point) -> bool:
        return segment_visible(self.polygon, p, q, self.arrays, strict=False)

    def visible_bulk(self, starts, ends) -> np.ndarray:
        return segments_visible_bulk(self.polygon, starts, ends, self.arrays)

    @property
    def vertex_metric(self) -> np.ndarray:
        """(n, n) matrix of geodesic distances between polygon vertices."""
        if self._vertex_metric is None:
            n = self.polygon.n
            vs = np.asarray(self.polygon.vertices, dtype=float)
            ii, jj = np.triu_indices(n, k=1)
            vis = self.visible_bulk(vs[ii], vs[jj])
            w = np.full((n, n), np.inf)
            np.fill_diagonal(w, 0.0)
            d = np.hypot(vs[ii, 0] - vs[jj, 0], vs[ii, 1] - vs[jj, 1])
            w[ii[vis], jj[vis]] = d[vis]
            w[jj[vis], ii[vis]] = d[vis]
            from scipy.sparse.csgraph import shortest_path

            self._vertex_metric = shortest_path(w, method="D", directed=False)
        return self._vertex_metric

    def vertex_visibility_ring(self, v: int) -> List[Point]:
        ring = self._vis_rings.get(v)
        if ring is None:
            ring = visibility_ring(self.tri, self.polygon.vertices[v])
            self._vis_rings[v] = ring
        return ring

    def vertex_visibility_geom(self, v: int) -> ShPolygon:
        geom = self._vis_polys.get(v)
        if geom is None:
            ring = self.vertex_visibility_ring(v)
            geom = ShPolygon(ring) if len(ring) >= 3 else ShPolygon()
            if not geom.is_empty and not geom.is_valid:
                geom = shapely.make_valid(geom)
            self._vis_polys[v] = geom
        return geom

    # -- point-to-point distance --------------------------------------------

    def distance(self, p: Point, q: Point) -> float:
        """Geodesic distance between two points of the closed polygon."""
        self.polygon.require_inside(p, "endpoint")
        self.polygon.require_inside(q, "endpoint")
        if self.visible(p, q):
            return dist(p, q)
        vs = self.polygon.vertices
        n = self.polygon.n
        metric = self.vertex_metric
        dq = np.full(n, np.inf)
        for v in range(n):
            if self.visible(vs[v], q):
                dq[v] = dist(vs[v], q)
        through = metric + dq[None, :]
        best_via = through.min(axis=1)  # geodesic from each vertex to q
        candidates = sorted(
            (float(dist(p, vs[v]) + best_via[v]), v)
            for v in self.reflex_ids
            if math.isfinite(best_via[v])
        )
        for d, v in candidates:
            if self.visible(p, vs[v]):
                return d
        raise AssertionError("polygon interior should be geodesically connected")


class GeodesicSource:
    """Distance field from a polyline source inside a polygon.

    The source is a set of segments (typically the internal boundary of a
    region). ``inside`` optionally carries the shapely geometry of the region
    the source bounds, so offsets can be restricted to the far side.
    """

    def __init__(
        self,
        engine: GeodesicEngine,
        segments: Sequence[Segment],
        inside: Optional[ShPolygon] = None,
    ):
        self.engine = engine
        self.segments = [s for s in segments if dist(s[0], s[1]) > 0.0]
        self.corners: List[Point] = []
        seen = set()
        for a, b in self.segments:
            for c in (a, b):
                key = (round(c[0], 12), round(c[1], 12))
                if key not in seen:
                    seen.add(key)
                    self.corners.append(c)
        self.inside = inside
        self._vertex_dist: Optional[np.ndarray] = None

    def _cache_key(self) -> tuple:
        return tuple(self.segments)

    @property
    def vertex_dist(self) -> np.ndarray:
        """Geodesic distance from every polygon vertex to the source."""
        if self._vertex_dist is None:
            eng = self.engine
            key = self._cache_key()
            cached = eng._source_dist_cache.get(key)
            if cached is not None:
                self._vertex_dist = cached
                return cached
            vs = np.asarray(eng.polygon.vertices, dtype=float)
            n = eng.polygon.n
            segs = np.asarray(self.segments, dtype=float)  # (m, 2, 2)
            a = segs[:, 0, :][None, :, :]  # (1, m, 2)
            ab = segs[:, 1, :][None, :, :] - a
            denom = (ab * ab).sum(axis=2)
            denom[denom == 0.0] = 1.0
            pv = vs[:, None, :]  # (n, 1, 2)
            t = ((pv - a) * ab).sum(axis=2) / denom
            t = np.clip(t, 0.0, 1.0)
            feet = a + t[:, :, None] * ab  # (n, m, 2)
            dists = np.hypot(*(pv - feet).transpose(2, 0, 1))  # (n, m)
            # Verify visibility vertex -> foot in bulk, nearest-first.
            direct = np.full(n, np.inf)
            order = np.argsort(dists, axis=1)
            pending = list(range(n))
            for col in range(order.shape[1]):
                if not pending:
                    break
                idx = np.array(pending)
                foot_sel = feet[idx, order[idx, col]]
                d_sel = dists[idx, order[idx, col]]
                vis = eng.visible_bulk(vs[idx], foot_sel)
                hit = idx[vis]
                direct[hit] = d_sel[vis]
                pending = [v for v in idx[~vis]]
            metric = eng.vertex_metric
            self._vertex_dist = np.minimum(
                direct, (metric + direct[None, :]).min(axis=1)
            )
            eng._source_dist_cache[key] = self._vertex_dist
        return self._vertex_dist

    def distance(self, p: Point) -> float:
        """Geodesic distance from p to the nearest source point."""
        if not self.segments:
            return math.inf
        eng = self.engine
        vs = eng.polygon.vertices
        vd = self.vertex_dist
        candidates: List[Tuple[float, Point]] = []
        for (a, b) in self.segments:
            foot = closest_point_on_segment(a, b, p)
            candidates.append((dist(p, foot), foot))
        for v in eng.reflex_ids:
            if math.isfinite(vd[v]):
                candidates.append((dist(p, vs[v]) + vd[v], vs[v]))
        candidates.sort(key=lambda c: c[0])
        pull = 1e-9 * max(1.0, eng.polygon.diameter)
        for d, target in candidates:
            if segment_visible_pulled(eng.polygon, p, target, eng.arrays, pull):
                return d
        # Degenerate fallback: exact checks.
        for d, target in candidates:
            if eng.visible(p, target):
                return d
        raise AssertionError("source should be geodesically reachable")

    # -- offset region --------------------------------------------------------

    def offset_geometry(self, d: float, both_sides: bool = False):
        """Shapely geometry of {x in P : geodist(x, source) <= d}, built from
        foot-bands and visibility-clipped relay disks. When the source bounds
        a region, pass both_sides=False to keep only the outward band."""
        eng = self.engine
        if d <= 0.0 or not self.segments:
            return ShPolygon()
        pieces = []
        for seg in self.segments:
            pieces.extend(self._foot_bands(seg, d, both_sides))
        for c in self.corners:
            pieces.append(self._vis_disk_at_point(c, d))
        vd = self.vertex_dist
        vs = eng.polygon.vertices
        for v in eng.reflex_ids:
            radius = d - vd[v]
            if radius > 0.0:
                vis = eng.vertex_visibility_geom(v)
                if not vis.is_empty:
                    disk = ShPolygon(circle_ring(vs[v], radius))
                    pieces.append(safe_intersection(disk, vis))
        geom = safe_union_all(pieces)
        geom = safe_intersection(geom, _valid(ShPolygon(eng.polygon.vertices)))
        if self.inside is not None and not both_sides:
            geom = safe_difference(geom, self.inside)
        return _valid(geom)

    def offset_region(self, d: float, both_sides: bool = False) -> Region:
        if d == 0.0:
            # Degenerate: the source polyline itself.
            return Region(rings=tuple(tuple(s) for s in self.segments))
        return Region.from_shapely(self.offset_geometry(d, both_sides))

    def _vis_disk_at_point(self, c: Point, radius: float):
        eng = self.engine
        polygon = eng.polygon
        v = eng._vertex_of_point.get(c)
        if v is None:
            # Corners of derived curves often coincide with polygon vertices
            # up to float dust; reuse the cached ring when they do.
            tol = 1e-9 * max(1.0, polygon.diameter)
            for i, pv in enumerate(polygon.vertices):
                if abs(pv[0] - c[0]) <= tol and abs(pv[1] - c[1]) <= tol:
                    v = i
                    break
        if v is not None:
            vis = eng.vertex_visibility_geom(v)
            c = polygon.vertices[v]
        else:
            c = _pull_inside(polygon, c)
            ring = visibility_ring(eng.tri, c)
            if len(ring) < 3:
                return ShPolygon()
            vis = _valid(ShPolygon(ring))
        if vis.is_empty:
            return ShPolygon()
        return safe_intersection(ShPolygon(circle_ring(c, radius)), vis)

    def _foot_bands(self, seg: Segment, d: float, both_sides: bool):
        """Band(s) of points that see their perpendicular foot on seg within
        distance d. Occlusion is handled exactly by subtracting the upward
        shadow of every boundary edge in the segment frame."""
        (a, b) = seg
        length = dist(a, b)
        ux, uy = (b[0] - a[0]) / length, (b[1] - a[1]) / length
        normals = [(uy, -ux)]  # right-hand side = outward for CCW rings
        if both_sides:
            normals.append((-uy, ux))
        out = []
        verts = self.engine.polygon.vertices
        n = self.engine.polygon.n
        for nx, ny in normals:
            def to_local(p: Point) -> Point:
                px, py = p[0] - a[0], p[1] - a[1]
                return (px * ux + py * uy, px * nx + py * ny)

            shadows = []
            for i in range(n):
                e0 = to_local(verts[i])
                e1 = to_local(verts[(i + 1) % n])
                clipped = _clip_to_box(e0, e1, length, d)
                if clipped is None:
                    continue
                (x0, y0), (x1, y1) = clipped
                if abs(x1 - x0) < 1e-15:
                    continue
                if min(y0, y1) >= d * (1.0 - 1e-12):
                    continue
                quad = ShPolygon([(x0, min(y0, d)), (x1, min(y1, d)), (x1, d), (x0, d)])
                quad = _valid(quad)
                if not quad.is_empty:
                    shadows.append(quad)
            band = ShPolygon([(0.0, 0.0), (length, 0.0), (length, d), (0.0, d)])
            if shadows:
                band = safe_difference(band, safe_union_all(shadows))
            if band.is_empty:
                continue
            band = shapely.transform(
                band,
                lambda pts: np.column_stack(
                    (
                        a[0] + pts[:, 0] * ux + pts[:, 1] * nx,
                        a[1] + pts[:, 0] * uy + pts[:, 1] * ny,
                    )
                ),
            )
            out.append(band)
        return out


def _clip_to_box(
    p0: Point, p1: Point, length: float, d: float
) -> Optional[Tuple[Point, Point]]:
    """Clip a segment (in band-local coordinates) to x in [0, length] and
    y in (~0, d]; blockers at or below the source line do not shadow."""
    t0, t1 = 0.0, 1.0
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    # Constraints c0 + t*c1 >= 0
    for c0, c1 in (
        (p0[0], dx),  # x >= 0
        (length - p0[0], -dx),  # x <= length
        (p0[1], dy),  # y >= 0
        (d - p0[1], -dy),  # y <= d
    ):
        if c1 == 0.0:
            if c0 < 0.0:
                return None
            continue
        t = -c0 / c1
        if c1 > 0.0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
    if t0 >= t1:
        return None
    q0 = (p0[0] + t0 * dx, p0[1] + t0 * dy)
    q1 = (p0[0] + t1 * dx, p0[1] + t1 * dy)
    if max(q0[1], q1[1]) <= 1e-12:
        return None
    return (q0, q1)


def _valid(geom):
    if geom.is_empty or geom.is_valid:
        return geom
    return shapely.make_valid(geom)


def _pull_inside(polygon: Polygon, p: Point) -> Point:
    """Return p, or a point a hair inside the polygon when p sits on (or a
    float-dust distance outside of) the boundary."""
    if polygon.contains(p) and not polygon.on_boundary(p):
        return p
    delta = 1e-12 * max(1.0, polygon.diameter)
    tol = 1e-9 * max(1.0, polygon.diameter)
    best = None
    best_d = math.inf
    for a, b in polygon.edges():
        q = closest_point_on_segment(a, b, p)
        d = dist(p, q)
        if d < best_d:
            best, best_d = (q, (a, b)), d
    if best is None or best_d > tol:
        polygon.require_inside(p, "offset corner")
        return p
    (q, (a, b)) = best
    ex, ey = b[0] - a[0], b[1] - a[1]
    norm = math.hypot(ex, ey)
    # interior lies to the left of a CCW edge
    candidate = (q[0] - delta * ey / norm, q[1] + delta * ex / norm)
    if polygon.contains(candidate):
        return candidate
    return q

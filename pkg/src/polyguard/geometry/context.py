"""Shared per-polygon caches: triangulation, visibility arrays, geodesics."""

from __future__ import annotations

from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

import shapely
from shapely.geometry import Polygon as ShPolygon
from shapely.prepared import prep

from .geodesic import GeodesicEngine, GeodesicSource, Segment
from .polygon import Polygon
from .primitives import Point
from .region import Region
from .triangulation import TriangulationGraph, triangulate
from .visibility import edge_arrays, segment_visible, visibility_ring


class PolygonContext:
    """Everything derived from one polygon, computed lazily and shared."""

    def __init__(self, polygon: Polygon, tri: Optional[TriangulationGraph] = None):
        self.polygon = polygon
        self._tri = tri
        self._engine: Optional[GeodesicEngine] = None
        self._arrays = None
        self._shape: Optional[ShPolygon] = None
        self._prepared = None

    @property
    def tri(self) -> TriangulationGraph:
        if self._tri is None:
            self._tri = triangulate(self.polygon)
        return self._tri

    @property
    def engine(self) -> GeodesicEngine:
        if self._engine is None:
            self._engine = GeodesicEngine(self.polygon, self.tri)
        return self._engine

    @property
    def arrays(self):
        if self._arrays is None:
            self._arrays = edge_arrays(self.polygon)
        return self._arrays

    @property
    def shape(self) -> ShPolygon:
        if self._shape is None:
            self._shape = ShPolygon(self.polygon.vertices)
            shapely.prepare(self._shape)
        return self._shape

    @property
    def prepared(self):
        if self._prepared is None:
            self._prepared = prep(self.shape)
        return self._prepared

    def covers_xy(self, x: float, y: float) -> bool:
        """Fast closed containment (crossing test); for hot loops where
        exact boundary semantics are not required."""
        verts = self.polygon.vertices
        n = self.polygon.n
        if n > 40:
            return bool(shapely.intersects_xy(self.shape, x, y))
        inside = False
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            if (ay > y) != (by > y):
                if x < ax + (y - ay) / (by - ay) * (bx - ax):
                    inside = not inside
        return inside

    @property
    def eps_offset(self) -> float:
        """Default curve-approximation tolerance: 1e-3 of the diameter."""
        return 1e-3 * self.polygon.diameter

    def segment_visible(self, p: Point, q: Point) -> bool:
        return segment_visible(self.polygon, p, q, self.arrays)

    def visibility_region(self, p: Point) -> Region:
        ring = visibility_ring(self.tri, p)
        if len(ring) < 3:
            return Region.empty()
        return Region.from_ring(ring)

    def geodesic_distance(self, p: Point, q: Point) -> float:
        return self.engine.distance(p, q)

    def source(self, segments: Sequence[Segment], inside=None) -> GeodesicSource:
        return GeodesicSource(self.engine, segments, inside)


@lru_cache(maxsize=512)
def get_context(polygon: Polygon) -> PolygonContext:
    return PolygonContext(polygon)


def visibility_polygon(polygon: Polygon, p: Point) -> Region:
    return get_context(polygon).visibility_region(p)


def geodesic_distance(polygon: Polygon, p: Point, q: Point) -> float:
    return get_context(polygon).geodesic_distance(p, q)


def geodesic_offset(
    polygon: Polygon,
    source: Union[Region, Sequence[Segment]],
    d: float,
    side: str = "outside",
) -> Region:
    """Points of the polygon within geodesic distance d of the source
    boundary. ``side="outside"`` keeps the far side of a region source;
    ``side="both"`` offsets a bare polyline in both directions."""
    if d < 0.0:
        raise ValueError("offset distance must be >= 0")
    ctx = get_context(polygon)
    if isinstance(source, Region):
        segments: List[Segment] = []
        for ring in source.rings:
            m = len(ring)
            if m < 2:
                continue
            for i in range(m):
                segments.append((ring[i], ring[(i + 1) % m]))
        inside = source.to_shapely() if side == "outside" else None
    else:
        segments = [(tuple(a), tuple(b)) for a, b in source]
        inside = None
        side = "both"
    src = ctx.source(segments, inside)
    return src.offset_region(d, both_sides=(side == "both"))

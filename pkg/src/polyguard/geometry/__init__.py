"""Planar geometry substrate: polygons, triangulation, visibility,
geodesics, regions."""

from .context import (
    PolygonContext,
    geodesic_distance,
    geodesic_offset,
    get_context,
    visibility_polygon,
)
from .geodesic import GeodesicEngine, GeodesicSource
from .polygon import OutsidePolygonError, Polygon, PolygonError
from .primitives import Point, dist, lerp, orient
from .region import Region, circle_ring, region_boolean
from .triangulation import (
    TriangulationGraph,
    TriangulationError,
    dual_graph,
    from_triangles,
    triangulate,
)
from .visibility import segment_visible, visibility_ring

__all__ = [
    "PolygonContext",
    "GeodesicEngine",
    "GeodesicSource",
    "OutsidePolygonError",
    "Polygon",
    "PolygonError",
    "Point",
    "Region",
    "TriangulationGraph",
    "TriangulationError",
    "circle_ring",
    "dist",
    "dual_graph",
    "from_triangles",
    "geodesic_distance",
    "geodesic_offset",
    "get_context",
    "lerp",
    "orient",
    "region_boolean",
    "segment_visible",
    "triangulate",
    "visibility_polygon",
    "visibility_ring",
]


def locate(tri: TriangulationGraph, p: Point) -> int:
    """Triangle id containing p; lowest id wins on shared boundaries."""
    return tri.locate(p)

"""polyguard: mixed static/mobile guard deployment, adaptive activation and
intruder tracking inside simple polygons."""

__version__ = "0.1.0"

from .geometry import (
    Polygon,
    PolygonError,
    Region,
    TriangulationGraph,
    geodesic_distance,
    geodesic_offset,
    region_boolean,
    segment_visible,
    triangulate,
    visibility_polygon,
)

__all__ = [
    "Polygon",
    "PolygonError",
    "Region",
    "TriangulationGraph",
    "__version__",
    "geodesic_distance",
    "geodesic_offset",
    "region_boolean",
    "segment_visible",
    "triangulate",
    "visibility_polygon",
]

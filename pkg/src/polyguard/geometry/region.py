"""Polygonal regions and regularized boolean operations (shapely-backed)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import shapely
from shapely.errors import GEOSException
from shapely.geometry import MultiPolygon, Point as ShPoint, Polygon as ShPolygon
from shapely.geometry.base import BaseGeometry

from .primitives import Point, polygon_signed_area


def _snap_grid(geoms) -> float:
    span = 1.0
    for g in geoms:
        if g.is_empty:
            continue
        minx, miny, maxx, maxy = g.bounds
        span = max(span, maxx - minx, maxy - miny)
    return 1e-9 * span


def _safe_geos(op, *geoms):
    """Run a GEOS set operation, healing invalid inputs on failure: first
    make_valid, then coordinate snapping. Derived shapes (offsets, region
    intersections) occasionally carry topology-breaking float dust."""
    try:
        return op(*geoms)
    except GEOSException:
        pass
    fixed = [shapely.make_valid(g) if not g.is_empty else g for g in geoms]
    try:
        return op(*fixed)
    except GEOSException:
        pass
    grid = _snap_grid(fixed)
    snapped = [shapely.set_precision(g, grid, mode="valid_output") for g in fixed]
    return op(*snapped)


def safe_union_all(geoms) -> BaseGeometry:
    geoms = [g for g in geoms if g is not None and not g.is_empty]
    if not geoms:
        return ShPolygon()
    return _safe_geos(lambda *gs: shapely.union_all(list(gs)), *geoms)


def safe_intersection(a: BaseGeometry, b: BaseGeometry) -> BaseGeometry:
    return _safe_geos(lambda x, y: x.intersection(y), a, b)


def safe_difference(a: BaseGeometry, b: BaseGeometry) -> BaseGeometry:
    return _safe_geos(lambda x, y: x.difference(y), a, b)

Ring = Tuple[Point, ...]


@dataclass(frozen=True)
class Region:
    """Area bounded by closed polylines: CCW rings are outer boundaries,
    CW rings are holes. May be empty or degenerate (zero area)."""

    rings: Tuple[Ring, ...] = ()

    @classmethod
    def empty(cls) -> "Region":
        return cls(rings=())

    @classmethod
    def from_ring(cls, pts: Sequence[Point]) -> "Region":
        return cls(rings=(tuple((float(x), float(y)) for x, y in pts),))

    @classmethod
    def from_shapely(cls, geom: BaseGeometry) -> "Region":
        geom = _clean(geom)
        rings: List[Ring] = []
        for poly in _polygons(geom):
            ext = list(poly.exterior.coords[:-1])
            if polygon_signed_area(ext) < 0:
                ext.reverse()
            rings.append(tuple(ext))
            for hole in poly.interiors:
                h = list(hole.coords[:-1])
                if polygon_signed_area(h) > 0:
                    h.reverse()
                rings.append(tuple(h))
        return cls(rings=tuple(rings))

    def to_shapely(self) -> BaseGeometry:
        outers = []
        holes = []
        for ring in self.rings:
            if len(ring) < 3:
                continue
            if polygon_signed_area(ring) >= 0:
                outers.append(ring)
            else:
                holes.append(ring)
        polys = []
        for outer in outers:
            shell = ShPolygon(outer)
            if not shell.is_valid:
                shell = shell.buffer(0)
            polys.append(shell)
        geom = shapely.union_all(polys) if polys else ShPolygon()
        for h in holes:
            hole_poly = ShPolygon(h)
            if not hole_poly.is_valid:
                hole_poly = hole_poly.buffer(0)
            geom = geom.difference(hole_poly)
        return _clean(geom)

    @property
    def area(self) -> float:
        return sum(polygon_signed_area(r) for r in self.rings if len(r) >= 3)

    @property
    def is_empty(self) -> bool:
        return self.area <= 0.0

    def covers(self, p: Point) -> bool:
        """Closed membership (boundary included)."""
        if not self.rings:
            return False
        return bool(shapely.covers(self.to_shapely(), ShPoint(p)))

    def to_json(self) -> List[List[List[float]]]:
        return [[[x, y] for x, y in ring] for ring in self.rings]

    @classmethod
    def from_json(cls, data: Iterable[Iterable[Sequence[float]]]) -> "Region":
        return cls(
            rings=tuple(
                tuple((float(x), float(y)) for x, y in ring) for ring in data
            )
        )


def _polygons(geom: BaseGeometry) -> List[ShPolygon]:
    if geom.is_empty:
        return []
    if isinstance(geom, ShPolygon):
        return [geom]
    if isinstance(geom, MultiPolygon):
        return list(geom.geoms)
    if hasattr(geom, "geoms"):
        out: List[ShPolygon] = []
        for g in geom.geoms:
            out.extend(_polygons(g))
        return out
    return []


def _clean(geom: BaseGeometry) -> BaseGeometry:
    if geom.is_empty:
        return geom
    if not geom.is_valid:
        geom = shapely.make_valid(geom)
    # Drop dangling lines/points produced by regularization.
    polys = _polygons(geom)
    if not polys:
        return ShPolygon()
    return shapely.union_all(polys)


def region_boolean(a: Region, b: Region, op: str) -> Region:
    """Regularized boolean of two regions: op in {intersect, union, difference}."""
    ga, gb = a.to_shapely(), b.to_shapely()
    if op == "intersect":
        return Region.from_shapely(ga.intersection(gb))
    if op == "union":
        return Region.from_shapely(ga.union(gb))
    if op == "difference":
        return Region.from_shapely(ga.difference(gb))
    raise ValueError(f"unknown boolean op {op!r}")


def circle_ring(center: Point, radius: float, max_step_deg: float = 5.0) -> List[Point]:
    """CCW polyline approximation of a circle, flattened at <= max_step_deg."""
    if radius <= 0.0:
        return []
    steps = max(8, int(math.ceil(360.0 / max_step_deg)))
    cx, cy = center
    return [
        (
            cx + radius * math.cos(2.0 * math.pi * k / steps),
            cy + radius * math.sin(2.0 * math.pi * k / steps),
        )
        for k in range(steps)
    ]

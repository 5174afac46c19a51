"""Simple polygon type: validation, containment, JSON loading."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .primitives import (
    Point,
    on_segment,
    orient,
    polygon_signed_area,
    segments_cross_properly,
)


class PolygonError(ValueError):
    """Raised when input does not describe a valid simple polygon."""

    def __init__(self, message: str, offending_edges: Optional[Tuple[Tuple[int, int], Tuple[int, int]]] = None):
        super().__init__(message)
        self.offending_edges = offending_edges


class OutsidePolygonError(ValueError):
    """Raised when a query point lies outside the polygon."""


@dataclass(frozen=True)
class Polygon:
    """Simple polygon, no holes, vertices in CCW order.

    Use :meth:`from_points` / :meth:`load` rather than the raw constructor:
    they validate simplicity and normalize orientation.
    """

    vertices: Tuple[Point, ...]
    was_reversed: bool = field(default=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @classmethod
    def from_points(cls, points: Sequence[Sequence[float]]) -> "Polygon":
        pts: List[Point] = [(float(x), float(y)) for x, y in points]
        if len(pts) >= 2 and pts[0] == pts[-1]:
            pts = pts[:-1]
        if len(pts) < 3:
            raise PolygonError(f"polygon needs at least 3 vertices, got {len(pts)}")
        n = len(pts)
        for i in range(n):
            if pts[i] == pts[(i + 1) % n]:
                raise PolygonError(f"duplicate consecutive vertices at index {i}")
        bad = _find_self_intersection(pts)
        if bad is not None:
            (i, j) = bad
            raise PolygonError(
                f"polygon is not simple: edge {i} ({pts[i]}-{pts[(i + 1) % n]}) "
                f"intersects edge {j} ({pts[j]}-{pts[(j + 1) % n]})",
                offending_edges=((i, (i + 1) % n), (j, (j + 1) % n)),
            )
        area = polygon_signed_area(pts)
        if area == 0.0:
            raise PolygonError("polygon has zero area")
        reversed_input = area < 0.0
        if reversed_input:
            pts.reverse()
        return cls(vertices=tuple(pts), was_reversed=reversed_input)

    @classmethod
    def load(cls, path: str) -> "Polygon":
        """Read a ``{"vertices": [[x, y], ...]}`` JSON document. CW input is
        reversed to CCW and flagged via :attr:`was_reversed`."""
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict) or "vertices" not in doc:
            raise PolygonError(f"{path}: expected a JSON object with a 'vertices' key")
        return cls.from_points(doc["vertices"])

    def dump(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"vertices": [[x, y] for x, y in self.vertices]}, fh)
            fh.write("\n")

    @property
    def area(self) -> float:
        return polygon_signed_area(self.vertices)

    @property
    def diameter(self) -> float:
        cached = self.__dict__.get("_diameter")
        if cached is None:
            xs = [p[0] for p in self.vertices]
            ys = [p[1] for p in self.vertices]
            cached = math.hypot(max(xs) - min(xs), max(ys) - min(ys))
            object.__setattr__(self, "_diameter", cached)
        return cached

    def edges(self) -> List[Tuple[Point, Point]]:
        n = self.n
        return [(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n)]

    def contains(self, p: Point) -> bool:
        """Closed containment: points on the boundary count as inside."""
        if self.on_boundary(p):
            return True
        return self._strictly_inside(p)

    def on_boundary(self, p: Point) -> bool:
        n = self.n
        for i in range(n):
            if on_segment(self.vertices[i], self.vertices[(i + 1) % n], p):
                return True
        return False

    def _strictly_inside(self, p: Point) -> bool:
        # Crossing-number test with the half-open edge rule; assumes p is not
        # on the boundary.
        inside = False
        n = self.n
        px, py = p
        for i in range(n):
            ax, ay = self.vertices[i]
            bx, by = self.vertices[(i + 1) % n]
            if (ay > py) != (by > py):
                t = (py - ay) / (by - ay)
                xcross = ax + t * (bx - ax)
                if px < xcross:
                    inside = not inside
        return inside

    def reflex_vertex_ids(self) -> List[int]:
        out = []
        n = self.n
        for i in range(n):
            a = self.vertices[(i - 1) % n]
            b = self.vertices[i]
            c = self.vertices[(i + 1) % n]
            if orient(a, b, c) < 0:
                out.append(i)
        return out

    def require_inside(self, p: Point, what: str = "point") -> None:
        if not self.contains(p):
            raise OutsidePolygonError(f"{what} {p} lies outside the polygon")

    def snap_inside(self, p: Point, tol: Optional[float] = None) -> Point:
        """p unchanged when inside; points within tol of the boundary are
        pulled to the nearest boundary edge and nudged strictly inward
        (heals float dust from derived constructions)."""
        if self.contains(p):
            return p
        if tol is None:
            tol = 1e-9 * max(1.0, self.diameter)
        from .primitives import closest_point_on_segment, dist

        best = None
        best_d = tol
        for a, b in self.edges():
            q = closest_point_on_segment(a, b, p)
            d = dist(p, q)
            if d <= best_d:
                best, best_d = (q, (a, b)), d
        if best is None:
            raise OutsidePolygonError(f"point {p} lies outside the polygon")
        q, (a, b) = best
        if self.contains(q):
            return q
        # Interior lies left of a CCW edge; push a hair inward.
        ex, ey = b[0] - a[0], b[1] - a[1]
        norm = math.hypot(ex, ey)
        delta = 1e-12 * max(1.0, self.diameter)
        for scale in (1.0, 1e3, 1e6):
            cand = (q[0] - delta * scale * ey / norm, q[1] + delta * scale * ex / norm)
            if self.contains(cand):
                return cand
        return q


def _find_self_intersection(pts: List[Point]) -> Optional[Tuple[int, int]]:
    n = len(pts)
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        for j in range(i + 1, n):
            c, d = pts[j], pts[(j + 1) % n]
            if j == i + 1:
                # Consecutive edges share b == c; a spike folds back.
                if on_segment(a, b, d) or on_segment(c, d, a):
                    return (i, j)
                continue
            if i == 0 and j == n - 1:
                # Closing edge shares d == a.
                if on_segment(a, b, c) or on_segment(c, d, b):
                    return (i, j)
                continue
            if segments_cross_properly(a, b, c, d) or (
                on_segment(a, b, c)
                or on_segment(a, b, d)
                or on_segment(c, d, a)
                or on_segment(c, d, b)
            ):
                return (i, j)
    return None

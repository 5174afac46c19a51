"""Shared test helpers: polygon generators and independent oracles."""

from __future__ import annotations

import heapq
import math
import random
from typing import Dict, List, Sequence, Tuple

from polyguard.geometry import Polygon
from polyguard.geometry.primitives import (
    Point,
    dist,
    on_segment,
    segments_cross_properly,
)

# ---------------------------------------------------------------------------
# Polygon generators (deterministic given a seed)
# ---------------------------------------------------------------------------


def regular_polygon(n: int, radius: float = 10.0) -> Polygon:
    pts = [
        (
            radius * math.cos(2 * math.pi * k / n),
            radius * math.sin(2 * math.pi * k / n),
        )
        for k in range(n)
    ]
    return Polygon.from_points(pts)


def random_star_polygon(n: int, seed: int, spike: float = 0.75) -> Polygon:
    """Star-shaped polygon: sorted random angles, wildly varying radii.
    Always simple; plenty of reflex vertices for spike > 0."""
    rng = random.Random(seed)
    while True:
        angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(n))
        ok = all(
            (angles[(i + 1) % n] - angles[i]) % (2 * math.pi) > 1e-3
            for i in range(n)
        )
        if not ok:
            continue
        pts = []
        for a in angles:
            r = 10.0 * (1.0 - spike * rng.random())
            pts.append((r * math.cos(a), r * math.sin(a)))
        try:
            return Polygon.from_points(pts)
        except Exception:
            continue


def random_simple_polygon(n: int, seed: int) -> Polygon:
    """Random simple polygon by 2-opt untangling of a random tour."""
    rng = random.Random(seed)
    while True:
        pts = [(rng.uniform(0, 20), rng.uniform(0, 20)) for _ in range(n)]
        if _untangle(pts):
            try:
                return Polygon.from_points(pts)
            except Exception:
                pass
        seed += 10_007
        rng = random.Random(seed)


def _untangle(pts: List[Point], max_passes: int = 2000) -> bool:
    n = len(pts)
    for _ in range(max_passes):
        crossing = None
        for i in range(n):
            a, b = pts[i], pts[(i + 1) % n]
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    continue
                c, d = pts[j], pts[(j + 1) % n]
                if segments_cross_properly(a, b, c, d):
                    crossing = (i, j)
                    break
            if crossing:
                break
        if crossing is None:
            return True
        i, j = crossing
        # reverse the chain between i+1 and j
        lo, hi = i + 1, j
        while lo < hi:
            pts[lo], pts[hi] = pts[hi], pts[lo]
            lo += 1
            hi -= 1
    return False


def corpus_polygon(index: int, seed: int = 20260811) -> Polygon:
    """Deterministic mixed corpus: star and untangle polygons, n in [5, 60]."""
    n = 5 + (index * 7) % 56
    if index % 3 == 0:
        return random_simple_polygon(n, seed + index)
    spike = 0.35 + 0.5 * ((index % 5) / 4.0)
    return random_star_polygon(n, seed + index, spike)


def all_triangulations(n: int) -> List[List[Tuple[int, int, int]]]:
    """Every triangulation of the convex n-gon 0..n-1 (Catalan many)."""

    def rec(i: int, j: int):
        if j - i < 2:
            return [[]]
        out = []
        for k in range(i + 1, j):
            for left in rec(i, k):
                for right in rec(k, j):
                    out.append(left + [(i, k, j)] + right)
        return out

    return rec(0, n - 1)


# ---------------------------------------------------------------------------
# Grid-Dijkstra geodesic oracle (independent of the production implementation)
# ---------------------------------------------------------------------------

_OFFSETS: List[Tuple[int, int]] = sorted(
    {
        (dx, dy)
        for dx in range(-3, 4)
        for dy in range(-3, 4)
        if (dx, dy) != (0, 0) and math.gcd(abs(dx), abs(dy)) == 1
    }
)


class GridGeodesicOracle:
    """Shortest paths on a dense grid graph inside the polygon. Metric error
    is O(h) plus a small directional term (neighbourhood radius 3)."""

    def __init__(self, polygon: Polygon, cells: int = 120):
        self.polygon = polygon
        xs = [p[0] for p in polygon.vertices]
        ys = [p[1] for p in polygon.vertices]
        self.x0, self.y0 = min(xs), min(ys)
        span = max(max(xs) - min(xs), max(ys) - min(ys))
        self.h = span / cells
        self.nx = int((max(xs) - self.x0) / self.h) + 2
        self.ny = int((max(ys) - self.y0) / self.h) + 2
        self.inside = {}
        for ix in range(self.nx):
            for iy in range(self.ny):
                p = self._pt(ix, iy)
                if polygon.contains(p):
                    self.inside[(ix, iy)] = p

    def _pt(self, ix: int, iy: int) -> Point:
        return (self.x0 + ix * self.h, self.y0 + iy * self.h)

    def _node_near(self, p: Point) -> Tuple[int, int]:
        ix = round((p[0] - self.x0) / self.h)
        iy = round((p[1] - self.y0) / self.h)
        best, best_d = None, math.inf
        for r in range(0, 6):
            for dx in range(-r, r + 1):
                for dy in range(-r, r + 1):
                    node = (ix + dx, iy + dy)
                    if node in self.inside:
                        d = dist(p, self.inside[node])
                        if d < best_d:
                            best, best_d = node, d
            if best is not None:
                return best
        raise AssertionError(f"no grid node near {p}")

    def _edge_ok(self, a: Point, b: Point) -> bool:
        # sample-based interior check (oracle-grade, not production code)
        steps = 4
        for k in range(1, steps):
            t = k / steps
            if not self.polygon.contains((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))):
                return False
        return True

    def distances_from(self, sources: Sequence[Tuple[Tuple[int, int], float]]) -> Dict[Tuple[int, int], float]:
        dist_map = {}
        pq = []
        for node, d0 in sources:
            if node in self.inside and d0 < dist_map.get(node, math.inf):
                dist_map[node] = d0
                heapq.heappush(pq, (d0, node))
        while pq:
            d, node = heapq.heappop(pq)
            if d > dist_map.get(node, math.inf):
                continue
            px = self.inside[node]
            for dx, dy in _OFFSETS:
                nb = (node[0] + dx, node[1] + dy)
                q = self.inside.get(nb)
                if q is None or not self._edge_ok(px, q):
                    continue
                nd = d + dist(px, q)
                if nd < dist_map.get(nb, math.inf):
                    dist_map[nb] = nd
                    heapq.heappush(pq, (nd, nb))
        return dist_map

    def distance(self, p: Point, q: Point) -> float:
        a = self._node_near(p)
        b = self._node_near(q)
        dm = self.distances_from([(a, dist(p, self.inside[a]))])
        return dm[b] + dist(q, self.inside[b])

    def distance_field_from_segments(
        self, segments: Sequence[Tuple[Point, Point]]
    ) -> Dict[Tuple[int, int], float]:
        from polyguard.geometry.primitives import closest_point_on_segment

        sources = []
        for node, p in self.inside.items():
            best = math.inf
            for (a, b) in segments:
                foot = closest_point_on_segment(a, b, p)
                d = dist(p, foot)
                if d < best and (d < 1.9 * self.h and self._edge_ok(p, foot)):
                    best = d
            if best < math.inf:
                sources.append((node, best))
        return self.distances_from(sources)

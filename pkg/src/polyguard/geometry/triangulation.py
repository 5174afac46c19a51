"""Polygon triangulation (ear clipping), dual tree and point location."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .polygon import OutsidePolygonError, Polygon, PolygonError
from .primitives import Point, orient, point_in_triangle

Edge = Tuple[int, int]  # unordered vertex-id pair, stored (min, max)


def _edge(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


class TriangulationError(ValueError):
    pass


@dataclass(frozen=True)
class TriangulationGraph:
    """Triangulation of a simple polygon plus its dual tree.

    Triangles are vertex-id triples in CCW order; the dual has one node per
    triangle id and an edge where two triangles share a diagonal.
    """

    polygon: Polygon
    triangles: Tuple[Tuple[int, int, int], ...]
    diagonals: Tuple[Edge, ...]
    dual_edges: Tuple[Tuple[int, int], ...]

    # index: diagonal -> (triangle id, triangle id), built in __post_init__
    _diag_tris: Dict[Edge, Tuple[int, int]] = field(
        default=None, repr=False, compare=False
    )
    _vertex_tris: Dict[int, Tuple[int, ...]] = field(
        default=None, repr=False, compare=False
    )
    _dual_adj: Dict[int, Tuple[int, ...]] = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self):
        diag_set = set(self.diagonals)
        diag_tris: Dict[Edge, List[int]] = {}
        vertex_tris: Dict[int, List[int]] = {v: [] for v in range(self.polygon.n)}
        for t, (a, b, c) in enumerate(self.triangles):
            for v in (a, b, c):
                vertex_tris[v].append(t)
            for e in ((a, b), (b, c), (c, a)):
                key = _edge(*e)
                if key in diag_set:
                    diag_tris.setdefault(key, []).append(t)
        adj: Dict[int, List[int]] = {t: [] for t in range(len(self.triangles))}
        for t1, t2 in self.dual_edges:
            adj[t1].append(t2)
            adj[t2].append(t1)
        object.__setattr__(
            self, "_diag_tris", {k: tuple(v) for k, v in diag_tris.items()}
        )
        object.__setattr__(
            self, "_vertex_tris", {k: tuple(v) for k, v in vertex_tris.items()}
        )
        object.__setattr__(self, "_dual_adj", {k: tuple(sorted(v)) for k, v in adj.items()})

    # -- structure queries -------------------------------------------------

    @property
    def n(self) -> int:
        return self.polygon.n

    def triangle_points(self, t: int) -> Tuple[Point, Point, Point]:
        a, b, c = self.triangles[t]
        vs = self.polygon.vertices
        return (vs[a], vs[b], vs[c])

    def triangles_at_vertex(self, v: int) -> Tuple[int, ...]:
        return self._vertex_tris[v]

    def triangles_of_diagonal(self, e: Edge) -> Tuple[int, ...]:
        return self._diag_tris.get(_edge(*e), ())

    def dual_neighbors(self, t: int) -> Tuple[int, ...]:
        return self._dual_adj[t]

    def shared_diagonal(self, t1: int, t2: int) -> Optional[Edge]:
        s = set(self.triangles[t1]) & set(self.triangles[t2])
        if len(s) != 2:
            return None
        e = _edge(*sorted(s))
        return e if e in self._diag_tris else None

    def triangle_edges(self, t: int) -> List[Edge]:
        a, b, c = self.triangles[t]
        return [_edge(a, b), _edge(b, c), _edge(c, a)]

    def is_boundary_edge(self, e: Edge) -> bool:
        a, b = e
        n = self.n
        return (b - a) % n == 1 or (a - b) % n == 1

    def edge_points(self, e: Edge) -> Tuple[Point, Point]:
        return (self.polygon.vertices[e[0]], self.polygon.vertices[e[1]])

    def validate(self) -> None:
        n = self.n
        if len(self.triangles) != n - 2:
            raise TriangulationError(
                f"expected {n - 2} triangles, have {len(self.triangles)}"
            )
        if len(self.diagonals) != n - 3:
            raise TriangulationError(
                f"expected {n - 3} diagonals, have {len(self.diagonals)}"
            )
        if len(self.dual_edges) != len(self.triangles) - 1:
            raise TriangulationError("dual is not a tree (edge count)")
        # Connectivity of the dual.
        if self.triangles:
            seen = {0}
            stack = [0]
            while stack:
                t = stack.pop()
                for u in self.dual_neighbors(t):
                    if u not in seen:
                        seen.add(u)
                        stack.append(u)
            if len(seen) != len(self.triangles):
                raise TriangulationError("dual is not connected")
        for t, (a, b, c) in enumerate(self.triangles):
            vs = self.polygon.vertices
            if orient(vs[a], vs[b], vs[c]) <= 0:
                raise TriangulationError(f"triangle {t} is not CCW/positive")

    # -- point location ----------------------------------------------------

    def locate(self, p: Point, hint: Optional[int] = None) -> int:
        """Triangle id containing p (closed triangles); lowest id wins on
        shared edges/vertices. Raises OutsidePolygonError for outside points."""
        if hint is not None:
            t = self._walk(p, hint)
            if t is not None:
                # Resolve the deterministic tie-break among neighbors.
                return self._lowest_containing(p, t)
        for t in range(len(self.triangles)):
            a, b, c = self.triangle_points(t)
            if point_in_triangle(p, a, b, c):
                return t
        raise OutsidePolygonError(f"point {p} is outside the polygon")

    def locate_tolerant(self, p: Point, hint: Optional[int] = None) -> int:
        """Like locate, but float-dust-outside points resolve to the least
        -violated triangle instead of raising."""
        try:
            return self.locate(p, hint=hint)
        except Exception:
            pass
        best_t, best_score = 0, -float("inf")
        vs = self.polygon.vertices
        for t, (a, b, c) in enumerate(self.triangles):
            pa, pb, pc = vs[a], vs[b], vs[c]
            score = min(
                (pb[0] - pa[0]) * (p[1] - pa[1]) - (pb[1] - pa[1]) * (p[0] - pa[0]),
                (pc[0] - pb[0]) * (p[1] - pb[1]) - (pc[1] - pb[1]) * (p[0] - pb[0]),
                (pa[0] - pc[0]) * (p[1] - pc[1]) - (pa[1] - pc[1]) * (p[0] - pc[0]),
            )
            if score > best_score:
                best_t, best_score = t, score
        return best_t

    def _lowest_containing(self, p: Point, t: int) -> int:
        best = t
        candidates = {t}
        for u in self.dual_neighbors(t):
            candidates.add(u)
            candidates.update(self.dual_neighbors(u))
        for u in sorted(candidates):
            if u >= best:
                break
            a, b, c = self.triangle_points(u)
            if point_in_triangle(p, a, b, c):
                best = u
                break
        # Vertex-incident triangles can tie without being dual-adjacent.
        a, b, c = self.triangles[best]
        for v in (a, b, c):
            if p == self.polygon.vertices[v]:
                return min(self._vertex_tris[v])
        return best

    def _walk(self, p: Point, start: int, max_steps: int = 256) -> Optional[int]:
        t = start
        prev = -1
        vs = self.polygon.vertices
        for _ in range(max_steps):
            a, b, c = self.triangles[t]
            pa, pb, pc = vs[a], vs[b], vs[c]
            if point_in_triangle(p, pa, pb, pc):
                return t
            moved = False
            for e0, e1 in ((a, b), (b, c), (c, a)):
                if orient(vs[e0], vs[e1], p) < 0:
                    nxt = self._across(t, _edge(e0, e1))
                    if nxt is not None and nxt != prev:
                        prev, t = t, nxt
                        moved = True
                        break
            if not moved:
                return None
        return None

    def _across(self, t: int, e: Edge) -> Optional[int]:
        tris = self._diag_tris.get(e)
        if not tris:
            return None
        for u in tris:
            if u != t:
                return u
        return None


def triangulate(polygon: Polygon) -> TriangulationGraph:
    """Ear-clipping triangulation, deterministic: the lowest-index ear is
    clipped at each step."""
    n = polygon.n
    vs = polygon.vertices
    ring: List[int] = list(range(n))
    triangles: List[Tuple[int, int, int]] = []
    diagonals: Set[Edge] = set()

    def is_ear(idx: int) -> bool:
        m = len(ring)
        a, b, c = ring[(idx - 1) % m], ring[idx], ring[(idx + 1) % m]
        if orient(vs[a], vs[b], vs[c]) <= 0:
            return False
        for v in ring:
            if v in (a, b, c):
                continue
            if point_in_triangle(vs[v], vs[a], vs[b], vs[c]):
                return False
        return True

    while len(ring) > 3:
        m = len(ring)
        clipped = False
        for idx in range(m):
            if is_ear(idx):
                a, b, c = ring[(idx - 1) % m], ring[idx], ring[(idx + 1) % m]
                triangles.append((a, b, c))
                diagonals.add(_edge(a, c))
                del ring[idx]
                clipped = True
                break
        if not clipped:
            raise TriangulationError(
                "no ear found; polygon is degenerate or not simple"
            )
    a, b, c = ring
    triangles.append((a, b, c))

    # Boundary edges of the final triangle are not diagonals.
    boundary = {_edge(i, (i + 1) % n) for i in range(n)}
    diagonals -= boundary

    dual_edges = _build_dual(triangles, diagonals)
    tri = TriangulationGraph(
        polygon=polygon,
        triangles=tuple(triangles),
        diagonals=tuple(sorted(diagonals)),
        dual_edges=tuple(sorted(dual_edges)),
    )
    tri.validate()
    return tri


def from_triangles(
    polygon: Polygon, triangles: Sequence[Tuple[int, int, int]]
) -> TriangulationGraph:
    """Build a TriangulationGraph from an explicit triangle list (used for
    combinatorial fixtures); triangles are reoriented CCW and validated."""
    n = polygon.n
    vs = polygon.vertices
    fixed = []
    for (a, b, c) in triangles:
        if orient(vs[a], vs[b], vs[c]) < 0:
            a, b, c = a, c, b
        fixed.append((a, b, c))
    boundary = {_edge(i, (i + 1) % n) for i in range(n)}
    edge_count: Dict[Edge, int] = {}
    for (a, b, c) in fixed:
        for e in (_edge(a, b), _edge(b, c), _edge(c, a)):
            edge_count[e] = edge_count.get(e, 0) + 1
    diagonals = {e for e, cnt in edge_count.items() if cnt == 2 and e not in boundary}
    dual_edges = _build_dual(fixed, diagonals)
    tri = TriangulationGraph(
        polygon=polygon,
        triangles=tuple(fixed),
        diagonals=tuple(sorted(diagonals)),
        dual_edges=tuple(sorted(dual_edges)),
    )
    tri.validate()
    return tri


def _build_dual(
    triangles: Sequence[Tuple[int, int, int]], diagonals: Set[Edge]
) -> List[Tuple[int, int]]:
    owner: Dict[Edge, List[int]] = {}
    for t, (a, b, c) in enumerate(triangles):
        for e in (_edge(a, b), _edge(b, c), _edge(c, a)):
            if e in diagonals:
                owner.setdefault(e, []).append(t)
    out = []
    for e, tris in owner.items():
        if len(tris) == 2:
            out.append((min(tris), max(tris)))
    return out


def dual_graph(tri: TriangulationGraph) -> Dict[int, Tuple[int, ...]]:
    """Adjacency view of the dual tree: triangle id -> neighbor ids."""
    return dict(tri._dual_adj)

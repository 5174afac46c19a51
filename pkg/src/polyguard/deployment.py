"""Guard deployment: partition the triangulation into basic polygons
(pentagon..nonagon pieces), solve each piece exhaustively for candidate
vertices and dominating diagonals, and assemble the guard roster."""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .geometry.primitives import dist
from .geometry.triangulation import Edge, TriangulationGraph

MIN_PIECE_TRIS = 3  # pentagon
MAX_PIECE_TRIS = 7  # nonagon


class DeploymentError(ValueError):
    pass


class InfeasiblePieceError(DeploymentError):
    def __init__(self, message: str, triangle: Optional[int] = None):
        super().__init__(message)
        self.triangle = triangle


@dataclass(frozen=True)
class Piece:
    index: int
    triangle_ids: Tuple[int, ...]
    vertex_ids: Tuple[int, ...]
    separating_diagonal: Optional[Edge]  # None for the residual piece

    @property
    def size(self) -> int:
        return len(self.vertex_ids)


@dataclass(frozen=True)
class BasicPolygonPartition:
    separating_diagonals: Tuple[Edge, ...]
    pieces: Tuple[Piece, ...]
    adjacency: Tuple[Tuple[int, ...], ...]  # piece index -> neighbor indices


@dataclass(frozen=True)
class DiagonalGuard:
    index: int
    diagonal: Edge
    candidate: int  # the candidate-vertex endpoint
    length: float

    @property
    def other_endpoint(self) -> int:
        a, b = self.diagonal
        return b if self.candidate == a else a


@dataclass(frozen=True)
class Deployment:
    tri: TriangulationGraph
    candidate_vertices: Tuple[int, ...]  # S_c, discovery order
    diagonal_guards: Tuple[DiagonalGuard, ...]  # S_g (one per S_h entry)
    vertex_guards: Tuple[int, ...]  # vertex ids of S_g^v
    partition: Optional[BasicPolygonPartition] = None

    @property
    def dominating_diagonals(self) -> Tuple[Edge, ...]:
        return tuple(g.diagonal for g in self.diagonal_guards)

    @property
    def diagonal_candidates(self) -> Tuple[int, ...]:
        """S_v^di: candidate vertices attached to diagonals."""
        return tuple(g.candidate for g in self.diagonal_guards)

    def guard_by_candidate(self, v: int) -> Optional[DiagonalGuard]:
        for g in self.diagonal_guards:
            if g.candidate == v:
                return g
        return None

    def to_json(self) -> dict:
        return {
            "n": self.tri.n,
            "candidate_vertices": list(self.candidate_vertices),
            "dominating_diagonals": [list(g.diagonal) for g in self.diagonal_guards],
            "diagonal_guards": [
                {
                    "index": g.index,
                    "diagonal": list(g.diagonal),
                    "candidate": g.candidate,
                    "length": g.length,
                }
                for g in self.diagonal_guards
            ],
            "vertex_guards": list(self.vertex_guards),
        }


# ---------------------------------------------------------------------------
# Partition into basic polygons
# ---------------------------------------------------------------------------


def _subgraph_vertex_count(tri: TriangulationGraph, tris: FrozenSet[int]) -> int:
    verts: Set[int] = set()
    for t in tris:
        verts.update(tri.triangles[t])
    return len(verts)


def _restricted_dual(
    tri: TriangulationGraph, tris: FrozenSet[int]
) -> Dict[int, List[int]]:
    adj: Dict[int, List[int]] = {t: [] for t in tris}
    for t in tris:
        for u in tri.dual_neighbors(t):
            if u in tris:
                adj[t].append(u)
    return adj


def find_splitting_diagonal(
    tri: TriangulationGraph, tris: Optional[FrozenSet[int]] = None
) -> Tuple[Edge, FrozenSet[int]]:
    """Diagonal that cuts off a minimal basic polygon (5..9 vertices) from the
    given sub-triangulation; returns the diagonal and the piece's triangles.

    Determinism: smallest piece wins, ties by diagonal index.
    """
    if tris is None:
        tris = frozenset(range(len(tri.triangles)))
    if _subgraph_vertex_count(tri, tris) < 10:
        raise DeploymentError("subgraph has fewer than 10 vertices")
    adj = _restricted_dual(tri, tris)
    root = min(tris)
    # Iterative post-order subtree sizes over the restricted dual tree.
    parent = {root: -1}
    order = [root]
    stack = [root]
    while stack:
        t = stack.pop()
        for u in adj[t]:
            if u not in parent:
                parent[u] = t
                order.append(u)
                stack.append(u)
    size = {t: 1 for t in tris}
    members: Dict[int, Set[int]] = {t: {t} for t in tris}
    for t in reversed(order):
        p = parent[t]
        if p != -1:
            size[p] += size[t]
            members[p].update(members[t])
    total = len(tris)
    best: Optional[Tuple[int, Edge, FrozenSet[int]]] = None
    for t in tris:
        p = parent[t]
        if p == -1:
            continue
        e = tri.shared_diagonal(t, p)
        for side_size, side in (
            (size[t], frozenset(members[t])),
            (total - size[t], None),
        ):
            if MIN_PIECE_TRIS <= side_size <= MAX_PIECE_TRIS:
                piece = side if side is not None else frozenset(tris - members[t])
                key = (side_size + 2, e)
                if best is None or key < (best[0], best[1]):
                    best = (side_size + 2, e, piece)
    if best is None:
        raise DeploymentError("no separating diagonal found (unexpected)")
    return best[1], best[2]


def partition(tri: TriangulationGraph) -> BasicPolygonPartition:
    """Iteratively split off minimal basic polygons until at most 9 vertices
    remain (Algorithm 1's first loop)."""
    if tri.n < 5:
        raise DeploymentError("partition requires n >= 5")
    active = frozenset(range(len(tri.triangles)))
    pieces: List[Piece] = []
    seps: List[Edge] = []
    while _subgraph_vertex_count(tri, active) >= 10:
        e, side = find_splitting_diagonal(tri, active)
        pieces.append(_make_piece(tri, len(pieces), side, e))
        seps.append(e)
        active = active - side
    pieces.append(_make_piece(tri, len(pieces), active, None))

    owner: Dict[int, int] = {}
    for piece in pieces:
        for t in piece.triangle_ids:
            owner[t] = piece.index
    adj: List[Set[int]] = [set() for _ in pieces]
    for e in seps:
        ts = tri.triangles_of_diagonal(e)
        if len(ts) == 2:
            a, b = owner[ts[0]], owner[ts[1]]
            if a != b:
                adj[a].add(b)
                adj[b].add(a)
    return BasicPolygonPartition(
        separating_diagonals=tuple(seps),
        pieces=tuple(pieces),
        adjacency=tuple(tuple(sorted(s)) for s in adj),
    )


def _make_piece(
    tri: TriangulationGraph, index: int, tris: FrozenSet[int], sep: Optional[Edge]
) -> Piece:
    verts: Set[int] = set()
    for t in tris:
        verts.update(tri.triangles[t])
    return Piece(
        index=index,
        triangle_ids=tuple(sorted(tris)),
        vertex_ids=tuple(sorted(verts)),
        separating_diagonal=sep,
    )


# ---------------------------------------------------------------------------
# Exhaustive solving of one basic polygon
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PieceSolution:
    candidate_vertices: Tuple[int, ...]
    diagonals: Tuple[Tuple[Edge, int], ...]  # (diagonal, tagged candidate)


def _piece_diagonal_pool(tri: TriangulationGraph, piece_tris: Sequence[int]) -> List[Edge]:
    """Candidate trajectories for the piece's diagonal guard: every internal
    chord between piece vertices (up to C(9,2) - 9 = 27 of them). The
    triangulation's own diagonals are a subset; general chords are needed,
    e.g. for heptagon pieces with no single dominating triangulation edge."""
    from .geometry.visibility import segment_visible

    verts: Set[int] = set()
    for t in piece_tris:
        verts.update(tri.triangles[t])
    polygon = tri.polygon
    vs = polygon.vertices
    n = polygon.n
    pool: Set[Edge] = set()
    ordered = sorted(verts)
    for i, u in enumerate(ordered):
        for v in ordered[i + 1 :]:
            if (v - u) % n == 1 or (u - v) % n == 1:
                continue  # polygon side, not a diagonal
            if segment_visible(polygon, vs[u], vs[v]):
                pool.add((u, v))
    return sorted(pool)


def solve_basic_polygon(
    tri: TriangulationGraph,
    piece_tris: Sequence[int],
    pre_covered: Set[int],
    pre_dominated: Set[int],
    available_candidates: Optional[Set[int]] = None,
    used_diagonals: Optional[Set[Edge]] = None,
) -> PieceSolution:
    """Minimum candidate vertices covering the piece's not-yet-covered
    triangles and minimum diagonals dominating the not-yet-dominated ones,
    each diagonal tagged with a distinct candidate endpoint.

    Exhaustive (pieces have <= 9 vertices). Preference among equal-size sets:
    cover/dominate the most not-yet-handled triangles globally, then lowest
    indices.
    """
    if available_candidates is None:
        available_candidates = set()
    if used_diagonals is None:
        used_diagonals = set()
    piece_tris = sorted(piece_tris)
    vertex_pool: List[int] = sorted({v for t in piece_tris for v in tri.triangles[t]})
    diag_pool = [e for e in _piece_diagonal_pool(tri, piece_tris) if e not in used_diagonals]

    required_cover = [t for t in piece_tris if t not in pre_covered]
    required_dom = [t for t in piece_tris if t not in pre_dominated]

    all_tris = range(len(tri.triangles))
    uncovered_global = {t for t in all_tris if t not in pre_covered}
    undominated_global = {t for t in all_tris if t not in pre_dominated}

    tri_verts = [set(tri.triangles[t]) for t in all_tris]

    def covers(vset: Tuple[int, ...], t: int) -> bool:
        return bool(tri_verts[t] & set(vset))

    def cover_gain(vset: Tuple[int, ...]) -> int:
        s = set(vset)
        return sum(1 for t in uncovered_global if tri_verts[t] & s)

    def dom_gain(eset: Tuple[Edge, ...]) -> int:
        ends = {v for e in eset for v in e}
        return sum(1 for t in undominated_global if tri_verts[t] & ends)

    for c_size in range(0, len(vertex_pool) + 1):
        c_sets = [
            s
            for s in combinations(vertex_pool, c_size)
            if all(covers(s, t) for t in required_cover)
        ]
        if not c_sets:
            continue
        c_sets.sort(key=lambda s: (-cover_gain(s), s))
        best: Optional[Tuple[int, int, PieceSolution]] = None
        for rank, s_c in enumerate(c_sets):
            sol = _min_diagonals(
                tri,
                diag_pool,
                required_dom,
                set(s_c) | available_candidates,
                dom_gain,
            )
            if sol is None:
                continue
            s_h, h_size = sol
            key = (h_size, rank)
            if best is None or key < best[:2]:
                best = (h_size, rank, PieceSolution(tuple(s_c), tuple(s_h)))
            if h_size == 0:
                break
        if best is not None:
            return best[2]
    bad = required_cover[0] if required_cover else (required_dom[0] if required_dom else None)
    raise InfeasiblePieceError(
        f"no feasible candidate/diagonal assignment for piece (triangle {bad})",
        triangle=bad,
    )


def _min_diagonals(
    tri: TriangulationGraph,
    pool: List[Edge],
    required_dom: Sequence[int],
    candidates: Set[int],
    dom_gain,
) -> Optional[Tuple[List[Tuple[Edge, int]], int]]:
    tri_verts = [set(tri.triangles[t]) for t in range(len(tri.triangles))]
    for h_size in range(0, len(pool) + 1):
        h_sets = []
        for es in combinations(pool, h_size):
            ends = {v for e in es for v in e}
            if all(tri_verts[t] & ends for t in required_dom):
                h_sets.append(es)
        if not h_sets:
            continue
        h_sets.sort(key=lambda es: (-dom_gain(es), es))
        for es in h_sets:
            assignment = _assign_candidates(es, candidates)
            if assignment is not None:
                return (assignment, h_size)
    return None


def _assign_candidates(
    diagonals: Tuple[Edge, ...], candidates: Set[int]
) -> Optional[List[Tuple[Edge, int]]]:
    """Injectively tag each diagonal with a candidate endpoint (lex-smallest
    assignment), or None when impossible."""
    if not diagonals:
        return []

    def backtrack(i: int, used: Set[int]) -> Optional[List[Tuple[Edge, int]]]:
        if i == len(diagonals):
            return []
        e = diagonals[i]
        for v in sorted(e):
            if v in candidates and v not in used:
                rest = backtrack(i + 1, used | {v})
                if rest is not None:
                    return [(e, v)] + rest
        return None

    return backtrack(0, set())


# ---------------------------------------------------------------------------
# Full deployment (Algorithm 1)
# ---------------------------------------------------------------------------


def deploy(tri: TriangulationGraph) -> Deployment:
    n = tri.n
    if n <= 4:
        # One static vertex guard at a vertex shared by all triangles.
        shared = set(tri.triangles[0])
        for t in tri.triangles[1:]:
            shared &= set(t)
        if not shared:
            raise DeploymentError("no common vertex in a <=4-gon (unexpected)")
        v = min(shared)
        return Deployment(
            tri=tri,
            candidate_vertices=(v,),
            diagonal_guards=(),
            vertex_guards=(v,),
            partition=None,
        )

    part = partition(tri)
    order = _processing_order(part)

    covered: Set[int] = set()
    dominated: Set[int] = set()
    s_c: List[int] = []
    guards: List[DiagonalGuard] = []
    unassigned_candidates: Set[int] = set()
    used_diagonals: Set[Edge] = set()

    vs = tri.polygon.vertices
    for pi in order:
        piece = part.pieces[pi]
        sol = solve_basic_polygon(
            tri,
            piece.triangle_ids,
            covered,
            dominated,
            unassigned_candidates,
            used_diagonals,
        )
        for v in sol.candidate_vertices:
            if v not in s_c:
                s_c.append(v)
                unassigned_candidates.add(v)
        for e, cand in sol.diagonals:
            guards.append(
                DiagonalGuard(
                    index=len(guards),
                    diagonal=e,
                    candidate=cand,
                    length=dist(vs[e[0]], vs[e[1]]),
                )
            )
            used_diagonals.add(e)
            unassigned_candidates.discard(cand)
        covered.update(
            t
            for t in range(len(tri.triangles))
            if set(tri.triangles[t]) & set(s_c)
        )
        ends = {v for g in guards for v in g.diagonal}
        dominated.update(
            t for t in range(len(tri.triangles)) if set(tri.triangles[t]) & ends
        )

    guards = _prune_redundant_diagonals(tri, guards)
    dep = Deployment(
        tri=tri,
        candidate_vertices=tuple(s_c),
        diagonal_guards=tuple(guards),
        vertex_guards=tuple(v for v in s_c if v not in {g.candidate for g in guards}),
        partition=part,
    )
    _validate(dep)
    return dep


def _prune_redundant_diagonals(
    tri: TriangulationGraph, guards: List[DiagonalGuard]
) -> List[DiagonalGuard]:
    """Drop diagonals whose removal keeps S_h dominating. The piece-by-piece
    pass can leave early diagonals redundant once later pieces contribute
    theirs; pruning (ascending index, to fixpoint) restores the n/4 budget."""
    tri_verts = [set(t) for t in tri.triangles]
    kept = list(guards)
    changed = True
    while changed:
        changed = False
        for i in range(len(kept)):
            trial = kept[:i] + kept[i + 1 :]
            if not trial:
                continue
            ends = {v for g in trial for v in g.diagonal}
            if all(verts & ends for verts in tri_verts):
                kept = trial
                changed = True
                break
    return [
        DiagonalGuard(index=i, diagonal=g.diagonal, candidate=g.candidate, length=g.length)
        for i, g in enumerate(kept)
    ]


def _processing_order(part: BasicPolygonPartition) -> List[int]:
    marked: Set[int] = set()
    order: List[int] = []
    k = len(part.pieces)
    while len(order) < k:
        progressed = False
        for i in range(k):
            if i in marked:
                continue
            unmarked_nb = sum(1 for j in part.adjacency[i] if j not in marked)
            if unmarked_nb <= 1:
                order.append(i)
                marked.add(i)
                progressed = True
                break
        if not progressed:
            raise DeploymentError("piece graph has no leaf (not a tree?)")
    return order


def _validate(dep: Deployment) -> None:
    tri = dep.tri
    n = tri.n
    s_c = set(dep.candidate_vertices)
    if len(dep.candidate_vertices) > n // 3:
        raise DeploymentError(
            f"|S_c|={len(dep.candidate_vertices)} exceeds n/3 bound ({n // 3})"
        )
    if len(dep.diagonal_guards) > n // 4:
        raise DeploymentError(
            f"|S_h|={len(dep.diagonal_guards)} exceeds n/4 bound ({n // 4})"
        )
    ends = {v for g in dep.diagonal_guards for v in g.diagonal}
    for t, verts in enumerate(tri.triangles):
        if not (set(verts) & s_c):
            raise DeploymentError(f"triangle {t} not covered by S_c")
        if not (set(verts) & ends):
            raise DeploymentError(f"triangle {t} not dominated by S_h")
    cands = [g.candidate for g in dep.diagonal_guards]
    if len(set(cands)) != len(cands):
        raise DeploymentError("diagonal candidate endpoints are not distinct")
    for g in dep.diagonal_guards:
        if g.candidate not in g.diagonal or g.candidate not in s_c:
            raise DeploymentError(f"guard {g.index} candidate tag invalid")
    diags = [g.diagonal for g in dep.diagonal_guards]
    if len(set(diags)) != len(diags):
        raise DeploymentError("dominating diagonals are not distinct")
    if set(dep.vertex_guards) & {g.candidate for g in dep.diagonal_guards}:
        raise DeploymentError("vertex guard collides with a diagonal candidate")
    if len(dep.candidate_vertices) != len(dep.vertex_guards) + len(dep.diagonal_guards):
        raise DeploymentError("|S_c| != |S_v^di| + |S_g^v|")


def deployment_to_json_str(dep: Deployment) -> str:
    return json.dumps(dep.to_json(), indent=2) + "\n"

"""Speed-ratio-driven activation of the static guards.

The update rule recomputes critical regions at the new ratio, finds
triangles violating the coverage condition and recursively activates vertex
guards (hopping through diagonal guards) until every non-safe triangle
passes; on ratio decreases it greedily deactivates guards while coverage
holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .deployment import Deployment
from .geometry.context import PolygonContext
from .geometry.primitives import Point, dist
from .guard_model import CriticalRegion, GuardModel, TriClass


class ActivationError(RuntimeError):
    pass


class TrackingLostError(RuntimeError):
    pass


@dataclass(frozen=True)
class ActivationState:
    r: float
    active: FrozenSet[int]  # vertex ids of active vertex guards


@dataclass(frozen=True)
class ActivationEvent:
    kind: str  # "activate" | "deactivate"
    r: float
    vertex: int
    triangle: Optional[int] = None  # triggering triangle for activations
    trace: Tuple[int, ...] = ()  # G_rec: triangles visited by the recursion

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "r": self.r,
            "vertex": self.vertex,
            "triangle": self.triangle,
            "trace": list(self.trace),
        }


class ActivationController:
    """Owns the model cache for one deployment and applies the update rule."""

    def __init__(self, ctx: PolygonContext, dep: Deployment):
        self.ctx = ctx
        self.dep = dep
        self._models: Dict[FrozenSet[int], GuardModel] = {}

    def initial_state(self) -> ActivationState:
        if not self.dep.diagonal_guards:
            # Tiny polygons deploy a single always-active vertex guard.
            return ActivationState(r=0.0, active=frozenset(self.dep.vertex_guards))
        return ActivationState(r=0.0, active=frozenset())

    def model(self, active: FrozenSet[int]) -> GuardModel:
        key = frozenset(active)
        m = self._models.get(key)
        if m is None:
            m = GuardModel(self.ctx, self.dep, key)
            self._models[key] = m
        return m

    # -- Algorithm 3 -----------------------------------------------------------

    def activate_guard(
        self, t_c: int, active: FrozenSet[int]
    ) -> Tuple[int, Tuple[int, ...]]:
        """Find one inactive vertex guard reachable from the failing triangle
        by hopping through diagonal guards; returns (vertex, recursion trace).

        The trace is a simple path of triangles; its length is bounded by the
        number of diagonal guards plus one.
        """
        dep = self.dep
        tri = dep.tri
        inactive = set(dep.vertex_guards) - set(active)
        if not inactive:
            raise ActivationError(
                f"no inactive vertex guard left while triangle {t_c} is failing"
            )
        candidate_of: Dict[int, int] = {
            g.candidate: g.index for g in dep.diagonal_guards
        }
        endpoint_guards: Dict[int, List[int]] = {}
        for g in dep.diagonal_guards:
            for v in g.diagonal:
                endpoint_guards.setdefault(v, []).append(g.index)
        model = self.model(active)

        def non_safe(t: int) -> bool:
            return model.labels.cls[t] != TriClass.SAFE

        def dfs(
            t: int, seen_t: FrozenSet[int], seen_g: FrozenSet[int]
        ) -> Optional[Tuple[int, List[int]]]:
            verts = set(tri.triangles[t])
            here = sorted(verts & inactive)
            if here:
                return (here[0], [t])
            # Prefer candidate vertices of diagonal guards, per the recursion
            # rule; fall back to any diagonal endpoint on the triangle.
            hop_vertices = sorted(v for v in verts if v in candidate_of)
            fallback = sorted(
                v for v in verts if v in endpoint_guards and v not in candidate_of
            )
            for v in hop_vertices + fallback:
                for g_idx in endpoint_guards.get(v, ()):
                    if g_idx in seen_g:
                        continue
                    g = dep.diagonal_guards[g_idx]
                    other = g.diagonal[0] if g.diagonal[1] == v else g.diagonal[1]
                    nexts = sorted(
                        t2
                        for t2 in tri.triangles_at_vertex(other)
                        if non_safe(t2) and t2 not in seen_t
                    )
                    for t2 in nexts:
                        res = dfs(t2, seen_t | {t2}, seen_g | {g_idx})
                        if res is not None:
                            vertex, path = res
                            return (vertex, [t] + path)
            return None

        result = dfs(t_c, frozenset({t_c}), frozenset())
        if result is None:
            raise ActivationError(
                f"activation recursion from triangle {t_c} found no inactive guard"
            )
        vertex, path = result
        if len(path) > len(dep.diagonal_guards) + 1:
            raise ActivationError("recursion trace longer than |S_g|+1 (cycle?)")
        return vertex, tuple(path)

    # -- Algorithm 2 -----------------------------------------------------------

    def update(
        self, state: ActivationState, r: float
    ) -> Tuple[ActivationState, List[ActivationEvent]]:
        if r < 0:
            raise ValueError("speed ratio must be >= 0")
        dep = self.dep
        if not dep.diagonal_guards:
            return ActivationState(r=r, active=frozenset(dep.vertex_guards)), []
        events: List[ActivationEvent] = []
        active = set(state.active)
        if r >= state.r:
            model = self.model(frozenset(active))
            regions = model.regions(r)
            failing = model.failing_triangles(regions, r)
            rounds = 0
            while failing:
                t_c = failing[0]
                vertex, trace = self.activate_guard(t_c, frozenset(active))
                active.add(vertex)
                events.append(
                    ActivationEvent(
                        kind="activate", r=r, vertex=vertex, triangle=t_c, trace=trace
                    )
                )
                model = self.model(frozenset(active))
                regions = model.regions(r)
                failing = model.failing_triangles(regions, r)
                rounds += 1
                if rounds > len(dep.vertex_guards) + 1:
                    raise ActivationError("activation did not converge")
        else:
            changed = True
            while changed:
                changed = False
                for v in sorted(active):
                    trial = frozenset(active - {v})
                    model = self.model(trial)
                    regions = model.regions(r)
                    if not model.failing_triangles(regions, r):
                        active.discard(v)
                        events.append(ActivationEvent(kind="deactivate", r=r, vertex=v))
                        changed = True
                        break
            model = self.model(frozenset(active))
            regions = model.regions(r)
            if model.failing_triangles(regions, r):
                raise ActivationError(
                    "coverage broken after ratio decrease (unexpected)"
                )
        return ActivationState(r=r, active=frozenset(active)), events

    # -- threshold sweep ---------------------------------------------------------

    def threshold_sweep(
        self, r_max: float, step: float, refine_tol: float = 1e-3
    ) -> "SweepResult":
        if step <= 0:
            raise ValueError("step must be > 0")
        state = self.initial_state()
        state, _ = self.update(state, 0.0)
        points: List[Tuple[float, int]] = [(0.0, len(state.active))]
        thresholds: List[Tuple[float, int]] = []
        r = step
        while r <= r_max + 1e-12:
            new_state, events = self.update(state, r)
            lo_count = len(state.active)
            hi_count = len(new_state.active)
            if hi_count > lo_count:
                for level in range(lo_count + 1, hi_count + 1):
                    thr = self._bisect_threshold(state, r - step, r, level, refine_tol)
                    thresholds.append((thr, level))
            points.append((r, hi_count))
            state = new_state
            r += step
        return SweepResult(points=tuple(points), thresholds=tuple(thresholds))

    def _bisect_threshold(
        self,
        base: ActivationState,
        lo: float,
        hi: float,
        level: int,
        tol: float,
    ) -> float:
        # smallest r in (lo, hi] where the active count reaches `level`,
        # evaluated by updating from the state at lo.
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            st, _ = self.update(base, mid)
            if len(st.active) >= level:
                hi = mid
            else:
                lo = mid
        return hi

    # -- tracking assignment -----------------------------------------------------

    def resolve_tracking_assignment(
        self,
        state: ActivationState,
        p_i: Point,
        model: Optional[GuardModel] = None,
        regions: Optional[Dict[int, CriticalRegion]] = None,
    ) -> List[Tuple[str, int, Point]]:
        """Guards whose commanded position lies on the boundary of the
        triangle containing the intruder: ("vertex"|"diagonal", id, point)."""
        dep = self.dep
        tri = dep.tri
        t = tri.locate(p_i)
        verts = set(tri.triangles[t])
        vs = tri.polygon.vertices
        out: List[Tuple[str, int, Point]] = []
        for v in sorted(state.active):
            if v in verts:
                out.append(("vertex", v, vs[v]))
        if dep.diagonal_guards:
            if model is None:
                model = self.model(state.active)
            if regions is None:
                regions = model.regions(state.r)
            tri_edges = set(tri.triangle_edges(t))
            tol = 1e-9 * max(1.0, tri.polygon.diameter)
            for g in dep.diagonal_guards:
                pos = model.reactive_position(g.index, regions, p_i)
                if g.diagonal in tri_edges:
                    out.append(("diagonal", g.index, pos))
                    continue
                for v in verts:
                    if dist(pos, vs[v]) <= tol:
                        out.append(("diagonal", g.index, pos))
                        break
        if not out:
            raise TrackingLostError(
                f"no guard covers triangle {t} at p_I={p_i} (r={state.r})"
            )
        return out


@dataclass(frozen=True)
class SweepResult:
    points: Tuple[Tuple[float, int], ...]
    thresholds: Tuple[Tuple[float, int], ...]  # (r, active count reached)

    @property
    def saturation_count(self) -> int:
        return self.points[-1][1] if self.points else 0

    def to_csv(self) -> str:
        lines = ["r,active_count"]
        for r, c in self.points:
            lines.append(f"{r:.6g},{c}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "points": [[r, c] for r, c in self.points],
            "thresholds": [[r, c] for r, c in self.thresholds],
        }

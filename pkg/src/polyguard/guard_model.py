"""Triangle and guard classification, critical regions, reactive motion.

Labels follow the safe/unsafe/regular taxonomy; guards are resolved to
types 0/1/2 (type-3 cycles are eliminated by reassigning regular triangles),
and each non-type-0 guard gets a critical region: an annulus between the
boundary of its owned region (S_int) and the curve at geodesic distance
d_M = r * diagonal_length on the far side (S_ext).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import shapely
from shapely.geometry import Polygon as ShPolygon
from shapely.prepared import prep

from .deployment import Deployment, DiagonalGuard
from .geometry.context import PolygonContext
from .geometry.geodesic import GeodesicSource
from .geometry.primitives import Point, dist, lerp
from .geometry.region import Region, safe_difference, safe_intersection, safe_union_all


class TriClass(IntEnum):
    SAFE = 0
    UNSAFE = 1
    REGULAR = 2


class ClassificationError(RuntimeError):
    pass


@dataclass(frozen=True)
class TriangleLabels:
    cls: Tuple[TriClass, ...]
    owner: Tuple[Optional[Tuple[int, int]], ...]  # (guard index, vertex id)
    covering: Tuple[Tuple[Tuple[int, int], ...], ...]  # per-tri (guard, vertex)

    def non_safe(self) -> List[int]:
        return [t for t in range(len(self.cls)) if self.cls[t] != TriClass.SAFE]


@dataclass
class GuardAssignment:
    guard: DiagonalGuard
    gtype: int  # 0, 1 or 2
    v1: int  # vertex id of the duty endpoint (resident endpoint for type 0)
    v2: int
    duty_tris: FrozenSet[int] = frozenset()  # unsafe triangles owned at v1
    pr_tris: FrozenSet[int] = frozenset()  # type 1: flooded owned side
    r1_regulars: Tuple[int, ...] = ()  # type 2: regular triangles at v1
    depends_on: Tuple[int, ...] = ()  # type 2: guards whose C1 feed S_B


@dataclass
class CriticalRegion:
    guard_index: int
    d_m: float
    s_int: Tuple[Tuple[Point, Point], ...]  # source segments
    c1: Region
    c1_geom: object  # shapely geometry
    source_geom: object  # shapely geometry of the owned side (P_R / S_B)
    source: object = None  # GeodesicSource for d_min queries
    _prepared_c1: object = field(default=None, repr=False)

    @property
    def is_empty(self) -> bool:
        return self.c1_geom.is_empty if self.c1_geom is not None else True

    def covers(self, p: Point) -> bool:
        if self.c1_geom is None or self.c1_geom.is_empty:
            return False
        if self._prepared_c1 is None:
            self._prepared_c1 = prep(self.c1_geom)
        return self._prepared_c1.covers(shapely.Point(p))


class GuardModel:
    """Classification of triangles and guards for one (deployment, active
    vertex-guard set) configuration. Critical regions are built per speed
    ratio on top of this."""

    def __init__(
        self,
        ctx: PolygonContext,
        dep: Deployment,
        active_vertices: FrozenSet[int] = frozenset(),
    ):
        self.ctx = ctx
        self.dep = dep
        self.active = frozenset(active_vertices)
        self.tri = dep.tri
        self._tri_geoms: Optional[List[ShPolygon]] = None
        self._sources: Dict[int, GeodesicSource] = {}
        self._regions_cache: Dict[float, Dict[int, CriticalRegion]] = {}
        self.conversions: Dict[int, Tuple[int, int]] = {}
        self.labels: TriangleLabels
        self.assignments: Dict[int, GuardAssignment]
        self.region_order: List[int]
        self._classify()

    # -- classification ------------------------------------------------------

    def _base_covering(self) -> List[Tuple[Tuple[int, int], ...]]:
        cov: List[Tuple[Tuple[int, int], ...]] = []
        for verts in self.tri.triangles:
            vset = set(verts)
            pairs = []
            for g in self.dep.diagonal_guards:
                for v in g.diagonal:
                    if v in vset:
                        pairs.append((g.index, v))
            cov.append(tuple(pairs))
        return cov

    def _compute_labels(self, parked_verts: Set[int]) -> TriangleLabels:
        tri = self.tri
        diag_set = {g.diagonal for g in self.dep.diagonal_guards}
        covering = self._base_covering()
        cls: List[TriClass] = []
        owner: List[Optional[Tuple[int, int]]] = []
        for t, verts in enumerate(tri.triangles):
            vset = set(verts)
            has_h_edge = any(e in diag_set for e in tri.triangle_edges(t))
            has_active = bool(vset & self.active)
            has_parked = bool(vset & parked_verts)
            if has_h_edge or has_active or has_parked:
                cls.append(TriClass.SAFE)
                owner.append(None)
                continue
            conv = self.conversions.get(t)
            if conv is not None:
                cls.append(TriClass.UNSAFE)
                owner.append(conv)
                continue
            pairs = covering[t]
            if len(pairs) == 0:
                raise ClassificationError(
                    f"non-safe triangle {t} has no covering guard (S_h must dominate)"
                )
            if len(pairs) == 1:
                cls.append(TriClass.UNSAFE)
                owner.append(pairs[0])
            else:
                cls.append(TriClass.REGULAR)
                owner.append(None)
        return TriangleLabels(tuple(cls), tuple(owner), tuple(covering))

    def _safe_for(self, labels: TriangleLabels, g: int, t: int) -> bool:
        if labels.cls[t] == TriClass.SAFE:
            return True
        if labels.cls[t] == TriClass.UNSAFE and labels.owner[t][0] != g:
            return True
        return False

    def _zone_b(self, labels: TriangleLabels, g: DiagonalGuard) -> Set[int]:
        """Augmented safe zone: connected closure of the diagonal's triangles
        over safe-for-g triangles incident to either endpoint."""
        tri = self.tri
        a_tris = set(tri.triangles_of_diagonal(g.diagonal))
        fan = set(tri.triangles_at_vertex(g.diagonal[0])) | set(
            tri.triangles_at_vertex(g.diagonal[1])
        )
        allowed = {t for t in fan if self._safe_for(labels, g.index, t)}
        blob = set(t for t in a_tris if t in allowed)
        # The diagonal's own triangles are safe by construction; still guard
        # against inconsistent inputs.
        frontier = list(blob)
        while frontier:
            t = frontier.pop()
            for u in self.tri.dual_neighbors(t):
                if u in allowed and u not in blob:
                    blob.add(u)
                    frontier.append(u)
        return blob

    def _classify(self) -> None:
        guards = self.dep.diagonal_guards
        self.conversions = {}
        while True:
            labels, assignments, order, type3 = self._classify_round()
            if not type3:
                self.labels = labels
                self.assignments = assignments
                self.region_order = order
                return
            # Resolve one type-3 guard: convert the regular triangles at one
            # endpoint into unsafe triangles owned by it.
            converted_guards = {g for (g, _v) in self.conversions.values()}
            best = None
            for g_idx in sorted(type3):
                if g_idx in converted_guards:
                    raise ClassificationError(
                        f"converted guard {g_idx} is type-3 again (unexpected)"
                    )
                g = guards[g_idx]
                for v in (g.candidate, g.other_endpoint):
                    converted = [
                        t
                        for t in self.tri.triangles_at_vertex(v)
                        if labels.cls[t] == TriClass.REGULAR
                    ]
                    if not converted:
                        continue
                    remaining = sum(
                        1 for c in labels.cls if c == TriClass.REGULAR
                    ) - len(converted)
                    key = (remaining, g_idx, 0 if v == g.candidate else 1)
                    if best is None or key < best[0]:
                        best = (key, g_idx, v, converted)
            if best is None:
                raise ClassificationError(
                    "type-3 guard without convertible regular triangles"
                )
            _, g_idx, v, converted = best
            for t in converted:
                self.conversions[t] = (g_idx, v)

    def _classify_round(self):
        """One classification fixpoint: labels -> types (with the type-0
        parking cascade) -> returns the set of unresolved type-3 guards.

        Parking is sticky within the round: once a guard rests (type 0) its
        endpoint is fixed, which makes the cascade monotone and finite.
        """
        guards = self.dep.diagonal_guards
        self.assignments = {}
        parked: Dict[int, int] = {}  # guard index -> resident vertex
        # A type-3 conversion relabels the chosen endpoint as v1 of that
        # guard; the duty endpoint is then fixed for the whole round.
        forced_v1: Dict[int, int] = {}
        for (g_idx, v) in self.conversions.values():
            forced_v1[g_idx] = v
        while True:
            labels = self._compute_labels(set(parked.values()))
            assignments: Dict[int, GuardAssignment] = {}
            order: List[int] = []
            unresolved: Set[int] = set(g.index for g in guards)

            def fan(v: int) -> Tuple[int, ...]:
                return self.tri.triangles_at_vertex(v)

            # Types 0 and 1 first.
            for g in guards:
                va, vb = g.candidate, g.other_endpoint
                if g.index in parked:
                    v1 = parked[g.index]
                    v2 = vb if v1 == va else va
                    duty = frozenset(
                        t
                        for t in fan(v1)
                        if labels.cls[t] == TriClass.UNSAFE
                        and labels.owner[t] == (g.index, v1)
                    )
                    assignments[g.index] = GuardAssignment(
                        guard=g, gtype=0, v1=v1, v2=v2, duty_tris=duty
                    )
                    order.append(g.index)
                    unresolved.discard(g.index)
                    continue
                b_zone = self._zone_b(labels, g)
                all_safe = {
                    v: all(self._safe_for(labels, g.index, t) for t in fan(v))
                    for v in (va, vb)
                }
                if all_safe[va] or all_safe[vb]:
                    if all_safe[va] and all_safe[vb]:
                        v1 = va  # both clear: rest at the candidate endpoint
                    else:
                        v1 = va if all_safe[vb] else vb
                    v2 = vb if v1 == va else va
                    duty = frozenset(
                        t
                        for t in fan(v1)
                        if labels.cls[t] == TriClass.UNSAFE
                        and labels.owner[t] == (g.index, v1)
                    )
                    assignments[g.index] = GuardAssignment(
                        guard=g, gtype=0, v1=v1, v2=v2, duty_tris=duty
                    )
                    order.append(g.index)
                    unresolved.discard(g.index)
                    continue
                if g.index in forced_v1:
                    endpoint_order = (forced_v1[g.index],)
                else:
                    endpoint_order = (va, vb)
                for v1 in endpoint_order:
                    unsafe_here = [
                        t
                        for t in fan(v1)
                        if labels.cls[t] == TriClass.UNSAFE
                        and labels.owner[t] == (g.index, v1)
                    ]
                    if not unsafe_here:
                        continue
                    reg_adj_b = any(
                        labels.cls[t] == TriClass.REGULAR
                        and any(u in b_zone for u in self.tri.dual_neighbors(t))
                        for t in fan(v1)
                    )
                    if reg_adj_b:
                        continue
                    v2 = vb if v1 == va else va
                    duty = frozenset(unsafe_here)
                    pr = self._flood_owned(labels, g.index, duty, b_zone)
                    assignments[g.index] = GuardAssignment(
                        guard=g,
                        gtype=1,
                        v1=v1,
                        v2=v2,
                        duty_tris=duty,
                        pr_tris=pr,
                    )
                    order.append(g.index)
                    unresolved.discard(g.index)
                    break

            # Type 2: needs all neighbours covering its regular fan resolved.
            progress = True
            while progress and unresolved:
                progress = False
                for g_idx in sorted(unresolved):
                    g = guards[g_idx]
                    if g_idx in forced_v1:
                        endpoint_order2 = (forced_v1[g_idx],)
                    else:
                        endpoint_order2 = (g.candidate, g.other_endpoint)
                    for v1 in endpoint_order2:
                        regs = [
                            t
                            for t in fan(v1)
                            if labels.cls[t] == TriClass.REGULAR
                        ]
                        neighbors = set()
                        ok = True
                        for t in regs:
                            for (l, _v) in labels.covering[t]:
                                if l != g_idx:
                                    neighbors.add(l)
                        for l in neighbors:
                            if l not in assignments:
                                ok = False
                                break
                        if not ok:
                            continue
                        v2 = (
                            g.other_endpoint if v1 == g.candidate else g.candidate
                        )
                        duty = frozenset(
                            t
                            for t in fan(v1)
                            if labels.cls[t] == TriClass.UNSAFE
                            and labels.owner[t] == (g_idx, v1)
                        )
                        assignments[g_idx] = GuardAssignment(
                            guard=g,
                            gtype=2,
                            v1=v1,
                            v2=v2,
                            duty_tris=duty,
                            r1_regulars=tuple(regs),
                            depends_on=tuple(sorted(neighbors)),
                        )
                        order.append(g_idx)
                        unresolved.discard(g_idx)
                        progress = True
                        break

            self.assignments = assignments
            new_parked = dict(parked)
            for a in assignments.values():
                if a.gtype == 0 and a.guard.index not in new_parked:
                    new_parked[a.guard.index] = a.v1
            if new_parked == parked:
                return labels, assignments, order, unresolved
            parked = new_parked

    def _flood_owned(
        self,
        labels: TriangleLabels,
        g_idx: int,
        duty: FrozenSet[int],
        b_zone: Set[int],
    ) -> FrozenSet[int]:
        """Owned side P_R: triangles reachable from the duty set without
        stepping onto safe ground. Stopping at every safe triangle (not just
        the augmented safe zone) keeps the owned side tight, which only
        enlarges the critical region (conservative)."""
        blob = set(duty)
        frontier = list(duty)
        while frontier:
            t = frontier.pop()
            for u in self.tri.dual_neighbors(t):
                if u in blob or u in b_zone:
                    continue
                if self._safe_for(labels, g_idx, u):
                    continue
                blob.add(u)
                frontier.append(u)
        return frozenset(blob)

    # -- critical regions ------------------------------------------------------

    @property
    def tri_geoms(self) -> List[ShPolygon]:
        if self._tri_geoms is None:
            self._tri_geoms = [
                ShPolygon(self.tri.triangle_points(t))
                for t in range(len(self.tri.triangles))
            ]
        return self._tri_geoms

    def _tri_union(self, tris: Sequence[int]):
        geoms = [self.tri_geoms[t] for t in tris]
        if not geoms:
            return ShPolygon()
        return safe_union_all(geoms)

    def _s_int_for_type1(self, a: GuardAssignment) -> List[Tuple[Point, Point]]:
        segs = []
        vs = self.tri.polygon.vertices
        for t in a.pr_tris:
            for u in self.tri.dual_neighbors(t):
                if u not in a.pr_tris:
                    e = self.tri.shared_diagonal(t, u)
                    if e is not None:
                        segs.append((vs[e[0]], vs[e[1]]))
        return segs

    def _source_for(self, a: GuardAssignment) -> GeodesicSource:
        src = self._sources.get(a.guard.index)
        if src is None:
            segs = self._s_int_for_type1(a)
            inside = self._tri_union(sorted(a.pr_tris))
            src = self.ctx.source(segs, inside)
            self._sources[a.guard.index] = src
        return src

    def regions(self, r: float) -> Dict[int, CriticalRegion]:
        cached = self._regions_cache.get(r)
        if cached is not None:
            return cached
        if r < 0:
            raise ValueError("speed ratio must be >= 0")
        out: Dict[int, CriticalRegion] = {}
        for g_idx in self.region_order:
            a = self.assignments[g_idx]
            d_m = r * a.guard.length
            if a.gtype == 0:
                out[g_idx] = CriticalRegion(
                    guard_index=g_idx,
                    d_m=d_m,
                    s_int=(),
                    c1=Region.empty(),
                    c1_geom=ShPolygon(),
                    source_geom=ShPolygon(),
                )
                continue
            if a.gtype == 1:
                src = self._source_for(a)
                segs = tuple(src.segments)
                source_geom = src.inside
            else:  # type 2
                segs_list, source_geom = self._type2_source_geom(a, out)
                src = self.ctx.source(segs_list, source_geom)
                segs = tuple(src.segments)
            if d_m <= 0.0 or not segs:
                c1_geom = ShPolygon()
            else:
                c1_geom = src.offset_geometry(d_m)
            out[g_idx] = CriticalRegion(
                guard_index=g_idx,
                d_m=d_m,
                s_int=segs,
                c1=Region.from_shapely(c1_geom),
                c1_geom=c1_geom,
                source_geom=source_geom,
                source=src,
            )
        missing = set(a.index for a in self.dep.diagonal_guards) - set(out)
        if missing:
            raise ClassificationError(f"guards without regions: {sorted(missing)}")
        self._regions_cache[r] = out
        return out

    def _type2_source_geom(self, a: GuardAssignment, regions: Dict[int, CriticalRegion]):
        """S_B: per regular triangle at v1, the part all covering neighbours
        leave exposed (intersection of their critical regions), plus the
        unsafe triangles at v1."""
        pieces = []
        labels = self.labels
        for t in a.r1_regulars:
            others = [l for (l, _v) in labels.covering[t] if l != a.guard.index]
            geom = self.tri_geoms[t]
            empty = False
            for l in others:
                reg = regions.get(l)
                if reg is None:
                    raise ClassificationError(
                        f"type-2 guard {a.guard.index} needs region of {l} first"
                    )
                if reg.c1_geom.is_empty:
                    empty = True
                    break
                geom = safe_intersection(geom, reg.c1_geom)
                if geom.is_empty:
                    empty = True
                    break
            if not empty and not geom.is_empty:
                pieces.append(geom)
        if a.duty_tris:
            pieces.append(self._tri_union(sorted(a.duty_tris)))
        if not pieces:
            return [], ShPolygon()
        geom = safe_union_all(pieces)
        segs = self._interior_segments(geom)
        return segs, geom

    def _interior_segments(self, geom) -> List[Tuple[Point, Point]]:
        segs: List[Tuple[Point, Point]] = []
        polygon = self.tri.polygon
        from .geometry.region import _polygons

        for poly in _polygons(geom):
            rings = [poly.exterior] + list(poly.interiors)
            for ring in rings:
                coords = list(ring.coords)
                for p0, p1 in zip(coords, coords[1:]):
                    mid = ((p0[0] + p1[0]) / 2, (p0[1] + p1[1]) / 2)
                    if polygon.on_boundary(mid):
                        continue
                    segs.append((tuple(p0), tuple(p1)))
        return segs

    # -- coverage and the reactive law ----------------------------------------

    def coverage_check(
        self, t: int, regions: Dict[int, CriticalRegion], r: float
    ) -> bool:
        """Coverage condition for a non-safe triangle: it stays covered iff
        the covering guards' critical regions have no common interior
        overlap with it. Triangles guarded only from far endpoints fail as
        soon as a critical region grows into them (for a triangle adjoining
        its guard's owned region that is any r > 0)."""
        labels = self.labels
        if labels.cls[t] == TriClass.SAFE:
            return True
        pairs = labels.covering[t]
        if not pairs:
            raise ClassificationError(f"non-safe triangle {t} has no covering guard")
        geom = self.tri_geoms[t]
        seen: Set[int] = set()
        for (g_idx, _v) in pairs:
            if g_idx in seen:
                continue
            seen.add(g_idx)
            reg = regions[g_idx]
            if reg.c1_geom.is_empty:
                return True
            geom = safe_intersection(geom, reg.c1_geom)
            if geom.is_empty:
                return True
        return geom.area <= self._eps_area

    @property
    def _eps_area(self) -> float:
        d = self.tri.polygon.diameter
        return 1e-9 * d * d

    def failing_triangles(self, regions: Dict[int, CriticalRegion], r: float) -> List[int]:
        return [
            t
            for t in self.labels.non_safe()
            if not self.coverage_check(t, regions, r)
        ]

    def reactive_position(
        self, g_idx: int, regions: Dict[int, CriticalRegion], p_i: Point
    ) -> Point:
        """Eq-style mapping of the intruder position to the guard's point on
        its diagonal: rest at v1 on the owned side, slide linearly with the
        geodesic distance across the critical region, rest at v2 beyond."""
        a = self.assignments[g_idx]
        vs = self.tri.polygon.vertices
        p_v1, p_v2 = vs[a.v1], vs[a.v2]
        if a.gtype == 0:
            return p_v1
        reg = regions[g_idx]
        if self._on_owned_side(a, reg, p_i):
            return p_v1
        if reg.d_m <= 0.0:
            return p_v2
        if not reg.is_empty:
            minx, miny, maxx, maxy = reg.c1_geom.bounds
            if not (minx <= p_i[0] <= maxx and miny <= p_i[1] <= maxy):
                return p_v2
        src = reg.source
        if src is None:
            src = self.ctx.source(list(reg.s_int), reg.source_geom)
        d_min = src.distance(p_i)
        if d_min >= reg.d_m:
            return p_v2
        t = d_min / reg.d_m
        return lerp(p_v1, p_v2, t)

    def _on_owned_side(self, a: GuardAssignment, reg: CriticalRegion, p: Point) -> bool:
        if a.gtype == 1:
            try:
                t = self.tri.locate(p)
            except Exception:
                return False
            return t in a.pr_tris
        if reg.source_geom is None or reg.source_geom.is_empty:
            return False
        return bool(shapely.covers(reg.source_geom, shapely.Point(p)))

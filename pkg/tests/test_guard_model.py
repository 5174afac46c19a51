import math

import pytest

from polyguard.deployment import Deployment, DiagonalGuard, deploy
from polyguard.geometry import Polygon, from_triangles, triangulate
from polyguard.geometry.context import PolygonContext
from polyguard.geometry.primitives import dist, lerp
from polyguard.guard_model import GuardModel, TriClass

from support import random_star_polygon, regular_polygon


def _manual_deployment(polygon, triangles, guard_specs, vertex_guards=()):
    """Build a Deployment directly from (diagonal, candidate) pairs."""
    tri = from_triangles(polygon, triangles)
    guards = tuple(
        DiagonalGuard(
            index=i,
            diagonal=(min(d), max(d)),
            candidate=c,
            length=dist(polygon.vertices[d[0]], polygon.vertices[d[1]]),
        )
        for i, (d, c) in enumerate(guard_specs)
    )
    candidates = tuple([g.candidate for g in guards] + list(vertex_guards))
    return Deployment(
        tri=tri,
        candidate_vertices=candidates,
        diagonal_guards=guards,
        vertex_guards=tuple(vertex_guards),
        partition=None,
    )


# Octagon with a closed ring of two diagonals and two shared regular
# triangles: both guards start unresolvable (type-3 cycle), the conversion
# breaks it.
def octagon_cycle_model():
    poly = regular_polygon(8)
    triangles = [
        (1, 2, 3),
        (3, 4, 5),
        (1, 3, 5),
        (5, 6, 7),
        (1, 5, 7),
        (7, 0, 1),
    ]
    dep = _manual_deployment(
        poly, triangles, guard_specs=[((1, 3), 1), ((5, 7), 5)]
    )
    ctx = PolygonContext(poly, dep.tri)
    return ctx, dep, GuardModel(ctx, dep)


def test_cycle_is_broken_without_type3_leftovers():
    ctx, dep, model = octagon_cycle_model()
    assert model.conversions, "the regular-triangle ring must force a conversion"
    assert len(model.assignments) == len(dep.diagonal_guards)
    assert all(a.gtype in (0, 1, 2) for a in model.assignments.values())
    # the converting guard keeps the conversion endpoint as its duty side
    for t, (g, v) in model.conversions.items():
        assert model.assignments[g].v1 == v
        if model.labels.cls[t] == TriClass.UNSAFE:
            assert model.labels.owner[t] == (g, v)


def test_h_edge_triangles_are_safe():
    ctx, dep, model = octagon_cycle_model()
    diag_set = {g.diagonal for g in dep.diagonal_guards}
    for t in range(len(dep.tri.triangles)):
        if any(e in diag_set for e in dep.tri.triangle_edges(t)):
            assert model.labels.cls[t] == TriClass.SAFE


def test_single_coverage_is_unsafe_with_owner():
    poly = regular_polygon(10)
    # one guard; triangles away from it but touching one endpoint are unsafe
    triangles = [
        (0, 1, 2),
        (0, 2, 3),
        (0, 3, 4),
        (0, 4, 5),
        (0, 5, 6),
        (0, 6, 7),
        (0, 7, 8),
        (0, 8, 9),
    ]
    dep = _manual_deployment(poly, triangles, guard_specs=[((0, 5), 0)])
    ctx = PolygonContext(poly, dep.tri)
    model = GuardModel(ctx, dep)
    for t, verts in enumerate(dep.tri.triangles):
        if model.labels.cls[t] == TriClass.UNSAFE:
            g, v = model.labels.owner[t]
            assert g == 0
            assert v in (0, 5)
            assert v in verts


def test_active_vertex_guard_makes_incident_triangles_safe():
    poly = random_star_polygon(14, seed=3, spike=0.6)
    tri = triangulate(poly)
    dep = deploy(tri)
    ctx = PolygonContext(poly, tri)
    base = GuardModel(ctx, dep)
    if not dep.vertex_guards:
        pytest.skip("deployment has no vertex guards")
    v = dep.vertex_guards[0]
    activated = GuardModel(ctx, dep, frozenset({v}))
    for t in tri.triangles_at_vertex(v):
        assert activated.labels.cls[t] == TriClass.SAFE
    # activation never makes previously safe triangles unsafe
    for t in range(len(tri.triangles)):
        if base.labels.cls[t] == TriClass.SAFE:
            assert activated.labels.cls[t] == TriClass.SAFE


def test_coverage_passes_at_r_zero():
    for seed in (3, 11, 19):
        poly = random_star_polygon(12, seed=seed, spike=0.65)
        tri = triangulate(poly)
        dep = deploy(tri)
        ctx = PolygonContext(poly, tri)
        model = GuardModel(ctx, dep)
        regions = model.regions(0.0)
        for t in model.labels.non_safe():
            assert model.coverage_check(t, regions, 0.0)
        for reg in regions.values():
            assert reg.c1.area == 0.0


def test_type0_guard_has_empty_region_at_all_r():
    ctx, dep, model = decagon_dual_duty_model()
    type0 = [g for g, a in model.assignments.items() if a.gtype == 0]
    assert type0
    for r in (0.0, 0.5, 2.0):
        regions = model.regions(r)
        for g in type0:
            assert regions[g].is_empty


def test_region_monotone_in_r():
    poly = random_star_polygon(12, seed=11, spike=0.65)
    tri = triangulate(poly)
    dep = deploy(tri)
    ctx = PolygonContext(poly, tri)
    model = GuardModel(ctx, dep)
    eps = 1e-3 * poly.diameter
    small = model.regions(0.3)
    big = model.regions(0.6)
    for g in small:
        if small[g].is_empty:
            continue
        leak = small[g].c1_geom.difference(big[g].c1_geom.buffer(eps)).area
        assert leak <= 1e-9 * poly.diameter ** 2


def test_region_avoids_owned_side():
    poly = random_star_polygon(12, seed=11, spike=0.65)
    tri = triangulate(poly)
    dep = deploy(tri)
    ctx = PolygonContext(poly, tri)
    model = GuardModel(ctx, dep)
    regions = model.regions(0.5)
    for g, reg in regions.items():
        if reg.is_empty or reg.source_geom.is_empty:
            continue
        assert reg.c1_geom.intersection(reg.source_geom).area < 1e-9


def decagon_dual_duty_model(active=()):
    """One guard ends up type 1 with duties at both diagonal endpoints; one
    vertex guard rescues the far side (the adaptive-activation narrative)."""
    poly = regular_polygon(10)
    triangles = [
        (9, 0, 1),
        (1, 2, 3),
        (3, 4, 5),
        (3, 5, 6),
        (1, 3, 6),
        (1, 6, 8),
        (6, 7, 8),
        (8, 9, 1),
    ]
    dep = _manual_deployment(
        poly, triangles, guard_specs=[((1, 3), 3), ((6, 8), 6)], vertex_guards=(1,)
    )
    ctx = PolygonContext(poly, dep.tri)
    return ctx, dep, GuardModel(ctx, dep, frozenset(active))


def test_decagon_structure_and_full_activation():
    ctx, dep, model = decagon_dual_duty_model()
    assert model.conversions == {3: (0, 3)}
    assert model.assignments[0].gtype == 1
    assert model.assignments[0].v1 == 3
    assert model.assignments[1].gtype == 0
    # the far-endpoint triangle fails once the critical region reaches it
    regions0 = model.regions(0.0)
    assert model.failing_triangles(regions0, 0.0) == []
    assert model.failing_triangles(model.regions(0.5), 0.5) == []
    regions = model.regions(1.2)
    assert 0 in model.failing_triangles(regions, 1.2)
    # activating the vertex guard at 1 makes the whole polygon safe
    ctx2, dep2, active_model = decagon_dual_duty_model(active=(1,))
    assert all(c == TriClass.SAFE for c in active_model.labels.cls)
    assert all(a.gtype == 0 for a in active_model.assignments.values())


def test_reactive_position_boundary_conditions():
    ctx, dep, model = decagon_dual_duty_model()
    g_idx = next(g for g, a in model.assignments.items() if a.gtype == 1)
    a = model.assignments[g_idx]
    vs = ctx.polygon.vertices
    r = 0.5
    regions = model.regions(r)
    reg = regions[g_idx]
    assert not reg.is_empty
    # a point on S_int maps to v1
    (s0, s1) = reg.s_int[0]
    on_curve = lerp(s0, s1, 0.5)
    pos = model.reactive_position(g_idx, regions, on_curve)
    assert dist(pos, vs[a.v1]) < 1e-6
    # a point well beyond the region maps to v2
    far = None
    for t in range(len(dep.tri.triangles)):
        c = dep.tri.triangle_points(t)
        cen = ((c[0][0] + c[1][0] + c[2][0]) / 3, (c[0][1] + c[1][1] + c[2][1]) / 3)
        if (
            not reg.covers(cen)
            and t not in a.pr_tris
            and reg.source.distance(cen) > reg.d_m * 1.5
        ):
            far = cen
            break
    if far is not None:
        pos = model.reactive_position(g_idx, regions, far)
        assert dist(pos, vs[a.v2]) < 1e-6


def test_reactive_position_linear_in_distance():
    ctx, dep, model = decagon_dual_duty_model()
    g_idx = next(g for g, a in model.assignments.items() if a.gtype == 1)
    a = model.assignments[g_idx]
    vs = ctx.polygon.vertices
    regions = model.regions(0.8)
    reg = regions[g_idx]
    # sample points inside C1 and check the interpolation law against the
    # independently exposed source distance
    geom = reg.c1_geom
    minx, miny, maxx, maxy = geom.bounds
    import random

    rng = random.Random(5)
    import shapely

    checked = 0
    while checked < 20:
        p = (rng.uniform(minx, maxx), rng.uniform(miny, maxy))
        if not geom.covers(shapely.Point(p)):
            continue
        d = reg.source.distance(p)
        if not (0 < d < reg.d_m):
            continue
        expected = lerp(vs[a.v1], vs[a.v2], d / reg.d_m)
        got = model.reactive_position(g_idx, regions, p)
        assert dist(got, expected) < 1e-9
        checked += 1

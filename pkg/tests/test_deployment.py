import json

import pytest

from polyguard.deployment import (
    DeploymentError,
    deploy,
    deployment_to_json_str,
    find_splitting_diagonal,
    partition,
    solve_basic_polygon,
)
from polyguard.geometry import Polygon, from_triangles, triangulate

from fixtures import PARTITION_18GON, TWO_STEP_19GON
from support import random_simple_polygon, random_star_polygon, regular_polygon


def _check_domination(tri, dep):
    sc = set(dep.candidate_vertices)
    ends = {v for g in dep.diagonal_guards for v in g.diagonal}
    for t, verts in enumerate(tri.triangles):
        assert set(verts) & sc, f"triangle {t} not covered by candidates"
        assert set(verts) & ends, f"triangle {t} not dominated by diagonals"


def test_convex_pentagon_single_guard():
    tri = triangulate(regular_polygon(5))
    dep = deploy(tri)
    assert len(dep.candidate_vertices) == 1
    assert len(dep.diagonal_guards) == 1
    assert dep.vertex_guards == ()


def test_triangle_and_quad_get_one_vertex_guard():
    for n in (3, 4):
        tri = triangulate(regular_polygon(n))
        dep = deploy(tri)
        assert len(dep.vertex_guards) == 1
        assert dep.diagonal_guards == ()
        v = dep.vertex_guards[0]
        for verts in tri.triangles:
            assert v in verts


def test_fan_10gon_splits_off_pentagon():
    poly = regular_polygon(10)
    fan = [(0, k, k + 1) for k in range(1, 9)]
    tri = from_triangles(poly, fan)
    e, side = find_splitting_diagonal(tri)
    piece_verts = {v for t in side for v in tri.triangles[t]}
    assert len(piece_verts) == 5
    # exhaustive minimality: no diagonal cuts a smaller basic piece
    for d in tri.diagonals:
        ts = tri.triangles_of_diagonal(d)
        if len(ts) != 2:
            continue
        seen = {ts[0]}
        stack = [ts[0]]
        while stack:
            x = stack.pop()
            for u in tri.dual_neighbors(x):
                if u not in seen and tri.shared_diagonal(x, u) != d:
                    seen.add(u)
                    stack.append(u)
        for cnt in (len(seen), len(tri.triangles) - len(seen)):
            if 3 <= cnt <= 7:
                assert cnt + 2 >= 5


def test_partition_small_polygon_rejected():
    tri = triangulate(regular_polygon(4))
    with pytest.raises(DeploymentError):
        partition(tri)


def test_partition_pieces_tile_triangles():
    for seed in (1, 7, 23):
        poly = random_star_polygon(34, seed=seed, spike=0.6)
        tri = triangulate(poly)
        part = partition(tri)
        seen = []
        for piece in part.pieces:
            seen.extend(piece.triangle_ids)
            if piece.separating_diagonal is not None:
                assert 5 <= piece.size <= 9
            else:
                assert piece.size <= 9
        assert sorted(seen) == list(range(len(tri.triangles)))


def test_partition_18gon_structure():
    tri = triangulate(PARTITION_18GON)
    assert len(tri.triangles) == 16
    assert len(tri.dual_edges) == 15
    part = partition(tri)
    assert len(part.separating_diagonals) == 3
    assert sorted(p.size for p in part.pieces) == [5, 6, 6, 7]


def test_deploy_18gon_counts():
    tri = triangulate(PARTITION_18GON)
    dep = deploy(tri)
    assert len(dep.candidate_vertices) == 4
    assert len(dep.diagonal_guards) == 3
    assert len(dep.vertex_guards) == 1
    _check_domination(tri, dep)


def test_deploy_19gon_fixture_counts():
    tri = triangulate(TWO_STEP_19GON)
    dep = deploy(tri)
    assert len(dep.candidate_vertices) == 5  # < floor(19/3) = 6
    assert len(dep.diagonal_guards) == 3
    assert len(dep.vertex_guards) == 2
    _check_domination(tri, dep)


def test_basic_polygon_bounds_on_samples():
    # spot Catalan cases here; the acceptance suite runs all of them
    from support import all_triangulations

    for k, sh_bound, sc_bound in ((5, 1, 1), (6, 1, 2), (7, 1, 2)):
        poly = regular_polygon(k)
        for tris in all_triangulations(k):
            tri = from_triangles(poly, tris)
            sol = solve_basic_polygon(
                tri, range(len(tri.triangles)), set(), set()
            )
            assert len(sol.diagonals) <= sh_bound
            assert len(sol.candidate_vertices) <= sc_bound


def test_deploy_bounds_and_domination_sample():
    for i in range(25):
        n = 5 + (i * 13) % 50
        poly = (
            random_star_polygon(n, seed=500 + i, spike=0.6)
            if i % 2
            else random_simple_polygon(n, seed=600 + i)
        )
        tri = triangulate(poly)
        dep = deploy(tri)
        assert len(dep.candidate_vertices) <= n // 3
        assert len(dep.diagonal_guards) <= n // 4
        _check_domination(tri, dep)
        cands = [g.candidate for g in dep.diagonal_guards]
        assert len(set(cands)) == len(cands)


def test_deploy_deterministic_json():
    poly = random_star_polygon(26, seed=3, spike=0.55)
    a = deployment_to_json_str(deploy(triangulate(poly)))
    b = deployment_to_json_str(deploy(triangulate(poly)))
    assert a == b

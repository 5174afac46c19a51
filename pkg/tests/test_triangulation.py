import random

import pytest

from polyguard.geometry import (
    Polygon,
    dual_graph,
    from_triangles,
    triangulate,
)
from polyguard.geometry.polygon import OutsidePolygonError
from polyguard.geometry.primitives import point_in_triangle

from support import random_simple_polygon, random_star_polygon, regular_polygon


def test_quadrilateral_counts():
    tri = triangulate(Polygon.from_points([(0, 0), (1, 0), (1, 1), (0, 1)]))
    assert len(tri.triangles) == 2
    assert len(tri.diagonals) == 1
    assert len(tri.dual_edges) == 1


def test_triangle_is_single_node():
    tri = triangulate(Polygon.from_points([(0, 0), (1, 0), (0, 1)]))
    assert len(tri.triangles) == 1
    assert tri.diagonals == ()
    assert tri.dual_edges == ()


def test_random_48gon_counts_and_tree():
    poly = random_simple_polygon(48, seed=424242)
    tri = triangulate(poly)
    assert len(tri.triangles) == 46
    assert len(tri.diagonals) == 45
    # independent tree validation: n-1 edges + connected, acyclic by union-find
    parent = list(range(len(tri.triangles)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in tri.dual_edges:
        ra, rb = find(a), find(b)
        assert ra != rb, "cycle in dual graph"
        parent[ra] = rb
    roots = {find(t) for t in range(len(tri.triangles))}
    assert len(roots) == 1, "dual graph is not connected"


def test_corpus_invariants():
    for i in range(12):
        n = 5 + (i * 9) % 40
        poly = random_star_polygon(n, seed=900 + i, spike=0.6)
        tri = triangulate(poly)
        assert len(tri.triangles) == n - 2
        assert len(tri.diagonals) == n - 3
        tri.validate()


def test_determinism():
    poly = random_star_polygon(21, seed=7, spike=0.5)
    t1 = triangulate(poly)
    t2 = triangulate(poly)
    assert t1.triangles == t2.triangles
    assert t1.diagonals == t2.diagonals


def test_dual_of_fan_hexagon_is_path():
    # convex hexagon fans from the last vertex under lowest-index ear clipping
    tri = triangulate(regular_polygon(6))
    adj = dual_graph(tri)
    degrees = sorted(len(v) for v in adj.values())
    assert degrees == [1, 1, 2, 2]  # a path of 4 nodes


def test_locate_centroid_returns_owner():
    poly = random_star_polygon(14, seed=77, spike=0.5)
    tri = triangulate(poly)
    for t in range(len(tri.triangles)):
        a, b, c = tri.triangle_points(t)
        centroid = ((a[0] + b[0] + c[0]) / 3, (a[1] + b[1] + c[1]) / 3)
        assert tri.locate(centroid) == t


def test_locate_tiebreak_on_shared_edge():
    # integer coordinates keep the diagonal midpoint exactly on the segment
    tri = triangulate(Polygon.from_points([(0, 0), (2, 0), (2, 2), (0, 2)]))
    e = tri.diagonals[0]
    p0, p1 = tri.edge_points(e)
    mid = ((p0[0] + p1[0]) / 2, (p0[1] + p1[1]) / 2)
    assert tri.locate(mid) == min(tri.triangles_of_diagonal(e))
    # shared vertex: lowest incident triangle id
    for v in range(4):
        assert tri.locate(tri.polygon.vertices[v]) == min(tri.triangles_at_vertex(v))


def test_locate_against_bruteforce_scan():
    poly = random_star_polygon(20, seed=3, spike=0.6)
    tri = triangulate(poly)
    rng = random.Random(11)
    xs = [p[0] for p in poly.vertices]
    ys = [p[1] for p in poly.vertices]
    hits = 0
    while hits < 1000:
        p = (rng.uniform(min(xs), max(xs)), rng.uniform(min(ys), max(ys)))
        if not poly.contains(p):
            continue
        hits += 1
        expected = None
        for t in range(len(tri.triangles)):
            a, b, c = tri.triangle_points(t)
            if point_in_triangle(p, a, b, c):
                expected = t
                break
        assert tri.locate(p) == expected


def test_locate_outside_raises():
    tri = triangulate(regular_polygon(5))
    with pytest.raises(OutsidePolygonError):
        tri.locate((100.0, 100.0))


def test_from_triangles_validates():
    poly = regular_polygon(6)
    fan = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5)]
    tri = from_triangles(poly, fan)
    tri.validate()
    assert len(tri.diagonals) == 3

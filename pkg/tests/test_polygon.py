import json

import pytest

from polyguard.geometry import Polygon, PolygonError


def test_square_basics():
    sq = Polygon.from_points([(0, 0), (2, 0), (2, 2), (0, 2)])
    assert sq.n == 4
    assert sq.area == 4.0
    assert not sq.was_reversed
    assert sq.contains((1, 1))
    assert sq.contains((0, 0))  # boundary counts as inside
    assert sq.contains((1, 0))
    assert not sq.contains((3, 1))


def test_cw_input_is_reversed_and_flagged():
    cw = Polygon.from_points([(0, 0), (0, 2), (2, 2), (2, 0)])
    assert cw.was_reversed
    assert cw.area > 0


def test_too_few_vertices_rejected():
    with pytest.raises(PolygonError):
        Polygon.from_points([(0, 0), (1, 0)])


def test_duplicate_consecutive_rejected():
    with pytest.raises(PolygonError):
        Polygon.from_points([(0, 0), (1, 0), (1, 0), (0, 1)])


def test_self_intersection_reports_edge_pair():
    with pytest.raises(PolygonError) as exc:
        Polygon.from_points([(0, 0), (2, 2), (2, 0), (0, 2)])  # bowtie
    assert exc.value.offending_edges is not None


def test_zero_area_rejected():
    with pytest.raises(PolygonError):
        Polygon.from_points([(0, 0), (1, 1), (2, 2)])


def test_reflex_vertices_of_l_shape():
    L = Polygon.from_points([(0, 0), (4, 0), (4, 1), (1, 1), (1, 4), (0, 4)])
    assert L.reflex_vertex_ids() == [3]


def test_json_roundtrip(tmp_path):
    path = tmp_path / "poly.json"
    with open(path, "w") as fh:
        json.dump({"vertices": [[0, 0], [3, 0], [3, 3], [0, 3]]}, fh)
    poly = Polygon.load(str(path))
    assert poly.n == 4
    out = tmp_path / "copy.json"
    poly.dump(str(out))
    again = Polygon.load(str(out))
    assert again.vertices == poly.vertices


def test_loader_rejects_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"points": []}')
    with pytest.raises(PolygonError):
        Polygon.load(str(path))

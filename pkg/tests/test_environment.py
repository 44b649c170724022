import json

import numpy as np
import pytest

from polysafe import asset_path
from polysafe.environment import (
    Cell,
    Environment,
    EnvironmentFormatError,
    Polytope,
    chebyshev_center,
    contains,
    environment_from_dict,
    environment_to_dict,
    load,
    overlap,
    save,
    validate,
)
from polysafe.trajectory import ControlPoints, bernstein_basis_many


def _box_cell(cell_id, lower, upper):
    mid = (np.array(lower) + np.array(upper)) / 2
    return Cell(cell_id, Polytope.box(lower, upper), ControlPoints(np.stack([mid, mid], axis=1)))


@pytest.mark.unit
def test_contains_unit_box():
    box = Polytope.box([0.0, 0.0], [1.0, 1.0])
    assert contains(box, [0.5, 0.5], 1e-9)
    assert not contains(box, [1.0 + 2e-9, 0.5], 1e-9)
    assert contains(box, [1.0 + 5e-10, 0.5], 1e-9)
    with pytest.raises(ValueError):
        contains(box, [0.5], 1e-9)


@pytest.mark.unit
def test_chebyshev_center_examples():
    center, radius = chebyshev_center(Polytope.box([0.0, 0.0], [1.0, 1.0]))
    np.testing.assert_allclose(center, [0.5, 0.5], atol=1e-9)
    assert radius == pytest.approx(0.5)

    center, radius = chebyshev_center(Polytope([[1.0], [-1.0]], [1.0, 0.0]))
    assert center[0] == pytest.approx(0.5) and radius == pytest.approx(0.5)

    _, radius = chebyshev_center(Polytope([[1.0], [-1.0]], [0.0, -1.0]))
    assert radius <= 0.0


@pytest.mark.unit
def test_chebyshev_center_is_contained(rng):
    for _ in range(20):
        angles = np.linspace(0, 2 * np.pi, 6, endpoint=False) + rng.uniform(-0.3, 0.3, 6)
        A = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        poly = Polytope(A, rng.uniform(1.0, 3.0, 6))
        center, radius = chebyshev_center(poly)
        assert radius > 0
        assert contains(poly, center, 1e-9)


@pytest.mark.unit
def test_overlap_of_boxes():
    c1 = _box_cell("a", [0.0, 0.0], [2.0, 1.0])
    c2 = _box_cell("b", [1.0, 0.0], [3.0, 1.0])
    both = overlap(c1, c2)
    assert both.num_faces == 8
    center, radius = chebyshev_center(both)
    assert radius == pytest.approx(0.5)
    np.testing.assert_allclose(center, [1.5, 0.5], atol=1e-9)
    # rows are canonically ordered, so both orders give the same LP
    assert chebyshev_center(overlap(c2, c1))[1] == radius

    far = _box_cell("c", [5.0, 5.0], [6.0, 6.0])
    assert chebyshev_center(overlap(c1, far))[1] <= 0.0

    same = overlap(c1, c1)
    assert chebyshev_center(same)[1] == pytest.approx(chebyshev_center(c1.polytope)[1])


@pytest.mark.unit
def test_vertices_of_box():
    vertices = Polytope.box([0.0, 0.0], [2.0, 1.0]).vertices()
    assert len(vertices) == 4
    assert {tuple(np.round(v, 9)) for v in vertices} == {(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (0.0, 1.0)}
    np.testing.assert_allclose(Polytope.box([1.0], [4.0]).vertices(), [[1.0], [4.0]])


@pytest.mark.unit
def test_corridor_asset(corridor):
    assert len(corridor.cells) == 3
    assert corridor.dimension == 2 and corridor.spline_degree == 3
    assert [c.id for c in corridor.chain()] == ["c0", "c1", "c2"]
    report = validate(corridor)
    assert report.ok, report.render()


@pytest.mark.unit
def test_figure8_asset(figure8):
    assert len(figure8.cells) == 10
    assert [c.id for c in figure8.chain()] == [f"c{i}" for i in range(10)]
    report = validate(figure8)
    assert report.ok, report.render()


@pytest.mark.unit
def test_broken_chain_asset():
    report = validate(load(asset_path("broken_chain.json")))
    assert not report.ok
    assert "overlap" in report.checks()
    assert {i.cell_id for i in report.issues} == {"c1"}, report.render()


@pytest.mark.unit
def test_moved_control_point_flags_only_that_cell(corridor):
    data = environment_to_dict(corridor)
    data["cells"][1]["control_points"][1] = [9.0, 2.5]
    report = validate(environment_from_dict(data))
    assert [(i.cell_id, i.check) for i in report.issues] == [("c1", "containment")], report.render()


@pytest.mark.unit
def test_missing_successor_and_cycle(corridor):
    data = environment_to_dict(corridor)
    data["cells"][2]["successor"] = "c0"
    report = validate(environment_from_dict(data))
    assert "chain" in report.checks()

    data = environment_to_dict(corridor)
    data["cells"][2]["successor"] = "nowhere"
    report = validate(environment_from_dict(data))
    assert "successor" in report.checks()


@pytest.mark.unit
def test_load_normalizes_rows(tmp_path, corridor):
    data = environment_to_dict(corridor)
    data["cells"][0]["halfspaces"][0] = {"normal": [2.0, 0.0], "offset": 8.0}
    path = tmp_path / "scaled.json"
    path.write_text(json.dumps(data))
    env = load(path)
    norms = np.linalg.norm(env.cells[0].polytope.A, axis=1)
    assert np.all(np.abs(norms - 1.0) <= 1e-12)
    assert env.cells[0].polytope.b[0] == pytest.approx(4.0)


@pytest.mark.unit
def test_save_load_round_trip(tmp_path, figure8):
    path = save(figure8, tmp_path / "env.json")
    env = load(path)
    for a, b in zip(figure8.cells, env.cells, strict=True):
        assert a.id == b.id and a.successor == b.successor
        np.testing.assert_allclose(a.polytope.A, b.polytope.A, atol=1e-12)
        np.testing.assert_allclose(a.polytope.b, b.polytope.b, atol=1e-12)
        np.testing.assert_allclose(a.segment.points, b.segment.points, atol=1e-12)


@pytest.mark.unit
def test_truncated_file_reports_byte_offset(tmp_path):
    text = asset_path("corridor3.json").read_text()
    path = tmp_path / "truncated.json"
    path.write_text(text[:300])
    with pytest.raises(EnvironmentFormatError, match="byte offset"):
        load(path)


@pytest.mark.unit
def test_invalid_utf8_reports_byte_offset(tmp_path):
    path = tmp_path / "latin1.json"
    path.write_bytes(b'{"dimension": 2, \xff}')
    with pytest.raises(EnvironmentFormatError, match="invalid UTF-8 at byte offset 17"):
        load(path)


@pytest.mark.unit
def test_schema_errors_name_cell_and_field(corridor):
    data = environment_to_dict(corridor)
    del data["cells"][1]["halfspaces"][2]["offset"]
    with pytest.raises(EnvironmentFormatError, match=r"cell 'c1'.*halfspaces\[2\]"):
        environment_from_dict(data)

    data = environment_to_dict(corridor)
    data["cells"][2]["control_points"] = data["cells"][2]["control_points"][:3]
    with pytest.raises(EnvironmentFormatError, match=r"cell 'c2'.*control_points"):
        environment_from_dict(data)


@pytest.mark.unit
def test_segments_stay_inside_cells(figure8):
    ts = np.linspace(0.0, 1.0, 1000)
    for cell in figure8.cells:
        samples = (cell.segment.points @ bernstein_basis_many(cell.segment.degree, ts)).T
        assert all(contains(cell.polytope, p, 1e-8) for p in samples), cell.id


@pytest.mark.unit
def test_first_containing_prefers_chain_order(figure8):
    # c0 and c9 overlap at the lower left corner
    assert figure8.first_containing([-7.0, -3.0]).id == "c0"
    assert figure8.first_containing([100.0, 0.0]) is None


@pytest.mark.unit
def test_unbounded_cell_is_reported(strip_cell):
    cell = strip_cell
    assert not cell.polytope.is_bounded()
    assert Polytope.box([0.0, 0.0], [1.0, 1.0]).is_bounded()
    _, radius = chebyshev_center(cell.polytope)
    assert radius == pytest.approx(0.5)

    report = validate(Environment((cell,), 2))
    assert [(i.cell_id, i.check) for i in report.issues] == [("strip", "bounded")], report.render()
    with pytest.raises(ValueError, match="bounded"):
        cell.polytope.vertices()

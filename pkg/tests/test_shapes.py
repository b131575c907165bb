import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cubical.dyadic import DyadicCube, build_cover, cover_volume
from cubical.errors import PreconditionError, UnsupportedShapeError
from cubical.families import eps_rational_balls
from cubical.shapes import (
    Ball, BallUnion, BoundaryOf, DenseUnitCube, Disk, Implicit, PointCloud, Polygon, Polyline,
    cube_intersects, distance_to, dump_shape, exact_measures, load_shape, read_point_cloud_csv,
    sample_boundary, shape_from_dict, unit_ball_volume,
)

SCHEMA = Path(__file__).resolve().parents[1] / "docs" / "shape.schema.json"
UNIT_SQUARE = [[0, 0], [1, 0], [1, 1], [0, 1]]


def test_cube_intersects_examples():
    d = Disk((0, 0), 1.0)
    assert cube_intersects(d, DyadicCube(0, (0, 0)))
    assert not cube_intersects(d, DyadicCube(0, (1, 1)))
    sq = Polygon(UNIT_SQUARE)
    assert cube_intersects(sq, DyadicCube(3, (4, 4)))
    assert not cube_intersects(sq, DyadicCube(3, (9, 4)))


def test_cube_intersects_dimension_mismatch():
    with pytest.raises(PreconditionError):
        cube_intersects(Disk((0, 0), 1.0), DyadicCube(1, (0, 0, 0)))


def test_unit_ball_volume():
    assert unit_ball_volume(0) == 1.0
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_exact_measures_examples():
    em = exact_measures(Disk((0, 0), 2.0))
    assert em.volume == pytest.approx(4 * math.pi)
    assert em.boundary_measure == pytest.approx(4 * math.pi)
    assert em.reach_true == 2.0
    em = exact_measures(Polygon(UNIT_SQUARE))
    assert (em.volume, em.boundary_measure, em.reach_true) == (1.0, 4.0, 0.0)
    em = exact_measures(PointCloud([[0, 0], [1, 1]]))
    assert em.volume == 0.0
    assert em.boundary_measure is None
    em = exact_measures(DenseUnitCube(2))
    assert em.volume == 0.0


def test_distance_examples():
    assert distance_to(Disk((0, 0), 1.0), (3, 4)) == pytest.approx(4.0)
    assert distance_to(Disk((0, 0), 1.0), (0.1, 0.1)) == 0.0
    assert distance_to(Polyline([[0, 0], [1, 0]]), (0.5, 2)) == pytest.approx(2.0)
    assert distance_to(BoundaryOf(Disk((0, 0), 1.0)), (0, 0)) == pytest.approx(1.0)


def _grid_area(shape, lo, hi, n=1200):
    # independent area oracle: midpoint rule on cell centres
    xs = np.linspace(lo[0], hi[0], n, endpoint=False) + (hi[0] - lo[0]) / (2 * n)
    ys = np.linspace(lo[1], hi[1], n, endpoint=False) + (hi[1] - lo[1]) / (2 * n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    inside = shape.distance(pts) == 0
    return inside.mean() * (hi[0] - lo[0]) * (hi[1] - lo[1])


def test_ball_union_area_against_grid():
    bu = BallUnion([[0, 0], [1.2, 0.3], [0.4, 1.0]], 0.8)
    em = exact_measures(bu)
    lo, hi = bu.bbox()
    assert em.volume == pytest.approx(_grid_area(bu, lo, hi), rel=5e-3)


def test_ball_union_perimeter_against_samples():
    bu = BallUnion([[0, 0], [1.2, 0.3]], 1.0)
    em = exact_measures(bu)
    pc = sample_boundary(bu, 1e-3)
    assert float(np.sum(pc.weights)) == pytest.approx(em.boundary_measure, rel=1e-3)


def test_disk_sampling():
    pc = sample_boundary(Disk((0, 0), 1.0), 0.1)
    assert len(pc) >= 63
    np.testing.assert_allclose(np.linalg.norm(pc.points, axis=1), 1.0)
    # tangent is orthogonal to the radius
    t = np.column_stack([np.cos(pc.theta), np.sin(pc.theta)])
    np.testing.assert_allclose(np.sum(t * pc.points, axis=1), 0.0, atol=1e-12)
    assert np.all((pc.theta >= 0) & (pc.theta < math.pi))


def test_square_sampling():
    pc = sample_boundary(Polygon(UNIT_SQUARE), 0.5)
    assert len(pc) == 8
    assert set(np.round(pc.theta, 12)) == {0.0, round(math.pi / 2, 12)}


@pytest.mark.parametrize("shape", [Disk((0.2, 0.1), 0.7), Polygon([[0, 0], [2, 0], [1, 1.5]])])
@pytest.mark.parametrize("spacing", [0.1, 0.013])
def test_sampling_gap_at_most_spacing(shape, spacing):
    pc = sample_boundary(shape, spacing)
    p = pc.points
    gaps = np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)
    assert gaps.max() <= spacing + 1e-12


def test_overlapping_balls_sampling():
    bu = BallUnion([[0, 0], [1, 0]], 0.8)
    pc = sample_boundary(bu, 0.01)
    d = np.linalg.norm(pc.points[:, None, :] - bu.centers[None], axis=2)
    assert np.all(d >= 0.8 - 1e-12)                      # never strictly inside a ball
    assert np.all(np.min(np.abs(d - 0.8), axis=1) < 1e-12)  # always on some circle


def test_sampling_unsupported():
    with pytest.raises(UnsupportedShapeError):
        sample_boundary(DenseUnitCube(2), 0.1)
    with pytest.raises(PreconditionError):
        sample_boundary(Disk((0, 0), 1.0), 0.0)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 8), st.integers(-20, 20), st.integers(-20, 20),
       st.floats(-1, 1), st.floats(-1, 1), st.floats(0.05, 1.5))
def test_predicate_consistent_with_distance(d, i, j, cx, cy, r):
    shape = Disk((cx, cy), r)
    cube = DyadicCube(d, (i, j))
    half_diag = math.sqrt(2) * cube.side / 2
    dc = distance_to(shape, cube.center)
    if dc > half_diag:
        assert not cube_intersects(shape, cube)
    if np.linalg.norm(cube.center - np.array([cx, cy])) < r:
        assert cube_intersects(shape, cube)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.floats(0.2, 1.0), st.floats(0.2, 1.0))
def test_ellipse_cover_is_conservative(d, a, b):
    # the interval evaluator never drops a cube the exact ellipse meets
    el = Implicit.ellipse((0.1, 0.05), (a, b))
    cov = build_cover(el, d)
    h = cov.side
    t = np.linspace(0, 2 * np.pi, 2000, endpoint=False)
    r = np.sqrt(np.random.default_rng(d).random(2000))
    pts = np.column_stack([0.1 + a * r * np.cos(t), 0.05 + b * r * np.sin(t)])
    cells = np.floor(pts / h).astype(int)
    assert np.all(cov.contains_indices(cells))


def test_ellipse_of_equal_axes_matches_disk():
    el = Implicit.ellipse((0, 0), (1, 1))
    for d in (3, 5):
        assert set(map(tuple, build_cover(Disk((0, 0), 1.0), d).indices.tolist())) <= \
            set(map(tuple, build_cover(el, d).indices.tolist()))


def test_polygon_reoriented_ccw_and_checked():
    cw = Polygon(UNIT_SQUARE[::-1])
    assert cw.area == pytest.approx(1.0)
    x, y = cw.vertices[:, 0], cw.vertices[:, 1]
    assert 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) > 0
    with pytest.raises(PreconditionError, match="not simple"):
        Polygon([[0, 0], [2, 2], [2, 0], [0, 1]])


def test_distant_collinear_edges_are_simple():
    # snowflake edges share supporting lines without touching
    from cubical.families import koch_snowflake
    for level in range(6):
        Polygon(koch_snowflake(level))


@pytest.mark.parametrize("bad", [
    {"kind": "disk", "center": [0, 0], "radius": -1},
    {"kind": "disk", "center": [0, 0]},
    {"kind": "ball_union", "centers": [[0, 0]]},
    {"kind": "triangle"},
    {"center": [0, 0]},
])
def test_malformed_shape_json(bad):
    with pytest.raises(PreconditionError):
        shape_from_dict(bad)


def test_missing_field_named_in_error():
    with pytest.raises(PreconditionError, match="radius"):
        shape_from_dict({"kind": "disk", "center": [0, 0]})


ALL_SHAPES = [
    Disk((0.1, -0.2), 0.5),
    BallUnion([[0, 0], [1, 1]], 0.5),
    BallUnion([[0, 0], [1, 1]], radii=[0.5, 0.25], clip=([0, 0], [1, 1])),
    Polygon([[0, 0], [2, 0], [1, 1]]),
    Polyline([[0, 0], [1, 0.5], [2, 0]]),
    PointCloud([[0, 0], [0.5, 0.5]], theta=[0.1, 0.2]),
    DenseUnitCube(2),
    Implicit.ellipse((0, 0), (1.0, 0.5)),
    BoundaryOf(Disk((0, 0), 1.0)),
    BoundaryOf(Polygon(UNIT_SQUARE)),
]


@pytest.mark.parametrize("shape", ALL_SHAPES, ids=lambda s: s.kind)
def test_json_roundtrip_preserves_cover(shape, tmp_path):
    path = tmp_path / "s.json"
    dump_shape(shape, path)
    back = load_shape(path)
    assert back.to_dict() == shape.to_dict()
    a, b = build_cover(shape, 5), build_cover(back, 5)
    np.testing.assert_array_equal(a.indices, b.indices)


@pytest.mark.parametrize("shape", ALL_SHAPES, ids=lambda s: s.kind)
def test_serialised_form_matches_schema(shape):
    jsonschema = pytest.importorskip("jsonschema")
    jsonschema.validate(shape.to_dict(), json.loads(SCHEMA.read_text()))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=6),
       st.floats(0.01, 3))
def test_ball_union_roundtrip(centers, r):
    bu = BallUnion(centers, r)
    back = shape_from_dict(json.loads(json.dumps(bu.to_dict())))
    np.testing.assert_array_equal(back.centers, bu.centers)
    assert back.common_radius == r


def test_point_cloud_csv(tmp_path):
    p = tmp_path / "pts.csv"
    p.write_text("x,y\n0,0\n0.5,0.25\n")
    pc = read_point_cloud_csv(p)
    np.testing.assert_array_equal(pc.points, [[0, 0], [0.5, 0.25]])


def test_eps_rational_balls_bound():
    eps = 0.01
    bu = eps_rational_balls(100, eps)
    total = sum(math.pi * r * r for r in bu.radii)
    assert total <= math.pi * eps**2 / 3 + 1e-15
    # the cover of a tiny set is still large
    assert cover_volume(build_cover(bu, 4)) == 1.0

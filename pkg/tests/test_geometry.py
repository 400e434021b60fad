import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boxray.geometry import (
    FanBeamConfig,
    GridSpec,
    Orientation,
    Ray,
    RaySet,
    chord_length,
    classify,
    entry_point,
    fanbeam_rayset,
    parallel_rayset,
    random_rayset,
    ray_from_angle_offset,
)

from oracles import chord_in_box

angles = st.floats(-10.0, 10.0, allow_nan=False)
offsets = st.floats(-20.0, 20.0, allow_nan=False)


@pytest.mark.parametrize(
    "theta, y, d, nrm",
    [
        (0.0, 0.5, (1, 0), (0, -1)),
        (math.pi / 2, 0.0, (0, 1), (1, 0)),
        (math.pi / 4, 1.0, (math.sqrt(0.5), math.sqrt(0.5)), (math.sqrt(0.5), -math.sqrt(0.5))),
    ],
)
def test_ray_vectors(theta, y, d, nrm):
    ray = ray_from_angle_offset(theta, y)
    assert ray.offset == y
    np.testing.assert_allclose(ray.dir, d, atol=1e-15)
    np.testing.assert_allclose(ray.normal, nrm, atol=1e-15)


@pytest.mark.parametrize("theta, y", [(math.nan, 0.0), (0.0, math.inf)])
def test_ray_rejects_non_finite(theta, y):
    with pytest.raises(ValueError):
        Ray(theta, y)


@given(angles, offsets)
def test_normal_is_orthonormal(theta, y):
    ray = Ray(theta, y)
    assert abs(ray.dir @ ray.normal) < 1e-15
    assert np.linalg.norm(ray.normal) == pytest.approx(1.0, abs=1e-15)
    # every point of the ray has the same normal coordinate
    for t in (-3.0, 0.0, 5.0):
        assert ray.point(t) @ ray.normal == pytest.approx(y, abs=1e-12)


@given(
    st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
    st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
)
def test_ray_through_two_points(a, b):
    if math.dist(a, b) < 1e-3:
        return
    ray = Ray.through(a, b)
    for pt in (a, b):
        assert (np.asarray(pt) @ ray.normal) == pytest.approx(ray.offset, abs=1e-12)
    assert ray.dir @ (np.subtract(b, a)) > 0


def test_ray_through_needs_distinct_points():
    with pytest.raises(ValueError):
        Ray.through((1, 1), (1, 1))


@pytest.mark.parametrize(
    "theta, expected",
    [
        (math.pi / 2, Orientation.MAINLY_VERTICAL),
        (0.0, Orientation.MAINLY_HORIZONTAL),
        (math.pi / 4, Orientation.MAINLY_HORIZONTAL),
        (3 * math.pi / 4, Orientation.MAINLY_HORIZONTAL),
        (math.pi / 3, Orientation.MAINLY_VERTICAL),
        (-math.pi / 2, Orientation.MAINLY_VERTICAL),
    ],
)
def test_classify(theta, expected):
    assert classify(Ray(theta, 0.0)) is expected


def test_entry_point_examples():
    grid = GridSpec(4)
    np.testing.assert_array_equal(entry_point(Ray(math.pi / 2, 2.5), grid), [2.5, 0.0])
    assert entry_point(Ray(0.0, 100.0), grid) is None
    np.testing.assert_allclose(entry_point(Ray(math.pi / 4, 0.0), grid), [0.0, 0.0], atol=1e-15)


def test_entry_point_misses_corner_touch_and_faces():
    grid = GridSpec(4)
    # touches only the corner (4, 0)
    assert entry_point(Ray.through((3, -1), (5, 1)), grid) is None
    # runs along the bottom face
    assert entry_point(Ray(0.0, 0.0), grid) is None


@given(angles, offsets)
def test_chord_length_matches_clipping_oracle(theta, y):
    grid = GridSpec(8, (-3.0, -5.0))
    expected = chord_in_box(theta, y, (-3.0, -5.0), (5.0, 3.0))
    got = chord_length(Ray(theta, y), grid)
    if expected > 1e-9:
        assert got == pytest.approx(expected, abs=1e-9)
    else:
        assert got < 1e-9


def test_grid_spec():
    grid = GridSpec.centered(4)
    assert grid.origin == (-2.0, -2.0)
    np.testing.assert_array_equal(grid.center, [0.0, 0.0])
    np.testing.assert_array_equal(grid.cell_center(0, 3), [-1.5, 1.5])
    with pytest.raises(ValueError):
        GridSpec(0)
    with pytest.raises(ValueError):
        GridSpec(2.5)


@given(angles, offsets)
def test_local_offsets_shift_with_origin(theta, y):
    grid = GridSpec(6, (1.25, -2.5))
    local = grid.local_offsets(np.array([theta]), np.array([y]))[0]
    # a world point on the ray, moved into grid-local coordinates
    pt = Ray(theta, y).point(0.7) - np.array(grid.origin)
    assert local == pytest.approx(pt @ Ray(theta, 0.0).normal, abs=1e-12)


def test_rayset_is_read_only():
    rs = RaySet([0.0, 1.0], [0.5, -0.5])
    assert len(rs) == 2
    assert rs[1] == Ray(1.0, -0.5)
    assert list(rs) == list(rs.rays)
    with pytest.raises(ValueError):
        rs.thetas[0] = 3.0
    with pytest.raises(ValueError):
        RaySet([0.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        RaySet([math.nan], [0.0])


def test_parallel_single_ray_through_center():
    grid = GridSpec(4)
    rs = parallel_rayset(1, 1, grid)
    assert len(rs) == 1 and rs.thetas[0] == 0.0
    assert rs[0].point(0.0) @ rs[0].normal == pytest.approx(grid.center @ rs[0].normal)


def test_parallel_angles_and_layout():
    grid = GridSpec(4)
    rs = parallel_rayset(2, 1, grid)
    np.testing.assert_allclose(rs.thetas, [0.0, math.pi / 2])
    rs = parallel_rayset(8, 4, grid)
    assert len(rs) == 32
    # angle-major ordering
    np.testing.assert_array_equal(rs.thetas[:4], np.zeros(4))
    offs = rs.offsets[:4] - rs.offsets[:4].mean()
    np.testing.assert_allclose(offs, [-1.5, -0.5, 0.5, 1.5])


def test_parallel_crowther_regime():
    n = 16
    rs = parallel_rayset(2 * n, n, GridSpec(n))
    assert len(np.unique(rs.thetas)) >= math.pi * n / 2


def test_random_rayset_is_seeded():
    grid = GridSpec(16)
    a, b = random_rayset(100, grid, seed=3), random_rayset(100, grid, seed=3)
    np.testing.assert_array_equal(a.thetas, b.thetas)
    np.testing.assert_array_equal(a.offsets, b.offsets)
    center = grid.center[0] * np.sin(a.thetas) - grid.center[1] * np.cos(a.thetas)
    assert np.all(np.abs(a.offsets - center) <= grid.n / 2)
    assert not np.array_equal(a.thetas, random_rayset(100, grid, seed=4).thetas)


def _fan(n_det=65, shift=0.0, angles=(0.0,)):
    return FanBeamConfig(200.0, 100.0, 1.5, n_det, angles, shift, voxel_size=1.0)


def test_fanbeam_central_ray_through_center():
    grid = GridSpec.centered(32)
    rs = fanbeam_rayset(_fan(), grid)
    assert rs.offsets[32] == pytest.approx(0.0, abs=1e-12)
    assert rs.thetas[32] == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("shift", [0.3, -1.25])
@pytest.mark.parametrize("voxel", [1.0, 0.4])
def test_fanbeam_shift_moves_central_ray(shift, voxel):
    grid = GridSpec.centered(32)
    cfg = FanBeamConfig(200.0, 100.0, 1.5, 65, (0.0,), shift, voxel_size=voxel)
    assert fanbeam_rayset(cfg, grid).offsets[32] == pytest.approx(shift, abs=1e-12)


@given(st.floats(0, 2 * math.pi), st.integers(0, 8), st.floats(-2, 2))
def test_fanbeam_rays_join_source_and_detector(beta, j, shift):
    cfg = FanBeamConfig(200.0, 100.0, 1.5, 9, (beta,), shift, voxel_size=2.0)
    grid = GridSpec(16, (3.0, -1.0))
    ray = fanbeam_rayset(cfg, grid)[j]
    # rebuild source and detector element positions in grid units
    axis = np.array([math.cos(beta), math.sin(beta)])
    lateral = np.array([math.sin(beta), -math.cos(beta)])
    u = (j - 4) * 1.5
    # the shift is in grid units, two physical units each
    src = -100.0 * axis + 2.0 * shift * lateral
    det = 100.0 * axis + (u + 2.0 * shift) * lateral
    for pt in (src, det):
        world = pt / 2.0 + grid.center
        assert world @ ray.normal == pytest.approx(ray.offset, abs=1e-9)
    assert ray.dir @ (det - src) > 0


def test_fanbeam_scanner_configuration():
    angles = tuple(np.arange(800) * 2 * math.pi / 800)
    cfg = FanBeamConfig(765.7, 96.46, 0.127, 512, angles)
    grid = GridSpec.centered(256)
    assert cfg.magnification == pytest.approx(765.7 / 96.46)
    assert cfg.cell_size(grid) == pytest.approx(512 * 0.127 / cfg.magnification / 256)
    rs = fanbeam_rayset(cfg, grid)
    assert len(rs) == 800 * 512
    # the magnified detector spans the grid: the outermost rays graze its edge region
    assert np.abs(rs.offsets).max() < 0.5 * 256 * 1.01


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(source_to_detector=50.0, source_to_object=100.0),
        dict(detector_pitch=0.0),
        dict(n_detectors=0),
        dict(angles=()),
        dict(voxel_size=-1.0),
        dict(cor_shift=math.nan),
    ],
)
def test_fanbeam_validation(kwargs):
    base = dict(source_to_detector=200.0, source_to_object=100.0, detector_pitch=1.0,
                n_detectors=4, angles=(0.0,))
    base.update(kwargs)
    with pytest.raises(ValueError):
        FanBeamConfig(**base)

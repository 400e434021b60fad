import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from boxray.profiles import (
    Generator,
    bspline_1d,
    disk_neighbor_bound,
    eval_box3_fast,
    eval_generator_2d,
    eval_profile,
    eval_tensor_bspline1_fast,
    eval_tensor_bspline2_fast,
    fourier_hat,
    neighbor_count,
    octagon_girth,
    octagon_neighbor_bound,
    project_generator,
    required_neighbors,
    support_radius,
    support_vertices,
    trace_margin,
)

from oracles import convolved_rects, cox_de_boor, line_integral_2d, profile_fourier, rect_widths, truncated_power_mp

# box3 profile at angle pi/8, y = 0, tabulated with the numerical
# convolution oracle (step 1e-4, trapezoid rule): 1.082392184
BOX3_PI8_AT_0 = 1.0823922

GENERATORS = [
    Generator.pixel(),
    Generator.box3(),
    Generator.box4(),
    Generator.tensor_bspline(1),
    Generator.tensor_bspline(2),
]
thetas = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)
unit = st.floats(-1.0, 1.0)


@pytest.fixture(params=GENERATORS, ids=lambda g: g.name)
def gen(request):
    return request.param


def test_from_name_round_trip(gen):
    assert Generator.from_name(gen.name) == gen
    assert Generator.from_name("BSpline 2") == Generator.tensor_bspline(2)


@pytest.mark.parametrize("bad", ["hexagon", "bspline", "bsplineX"])
def test_from_name_rejects(bad):
    with pytest.raises(ValueError):
        Generator.from_name(bad)


def test_generator_validation():
    with pytest.raises(ValueError):
        Generator.generic([])
    with pytest.raises(ValueError):
        Generator.generic([(0.0, 0.0)])
    with pytest.raises(ValueError):
        Generator.generic([(1.0, 0.0)] * 9)
    with pytest.raises(ValueError):
        Generator.tensor_bspline(4)


def test_pixel_at_zero_is_unit_rect():
    prof = project_generator(Generator.pixel(), 0.0)
    assert prof.support == pytest.approx((-0.5, 0.5))
    assert eval_profile(prof, 0.49) == 1.0
    assert eval_profile(prof, 0.51) == 0.0
    assert eval_profile(prof, -0.3) == 1.0


def test_pixel_at_quarter_turn_is_triangle():
    prof = project_generator(Generator.pixel(), math.pi / 4)
    h = math.sqrt(0.5)
    assert prof.support == pytest.approx((-h, h))
    assert eval_profile(prof, 0.0) == pytest.approx(math.sqrt(2.0), abs=1e-14)
    assert eval_profile(prof, h / 2) == pytest.approx(math.sqrt(2.0) / 2, abs=1e-14)


@given(thetas)
def test_profile_vanishes_at_support_edges(theta):
    for g in GENERATORS:
        prof = project_generator(g, theta)
        lo, hi = prof.support
        assert abs(eval_profile(prof, lo)) < 1e-9
        assert abs(eval_profile(prof, hi)) < 1e-9
        assert eval_profile(prof, hi + 1e-6) == 0.0


def test_dirac_profile_for_single_direction():
    prof = project_generator(Generator.generic([(1.0, 0.0)]), 0.0)
    assert prof.dirac
    assert eval_profile(prof, 0.0) == 0.0


def test_profile_accepts_arrays(gen):
    prof = project_generator(gen, 0.4)
    ys = np.linspace(-2, 2, 12).reshape(3, 4)
    out = eval_profile(prof, ys)
    assert out.shape == (3, 4)
    np.testing.assert_array_equal(out.ravel(), [eval_profile(prof, y) for y in ys.ravel()])


def test_box3_tabulated_value():
    assert eval_profile(project_generator(Generator.box3(), math.pi / 8), 0.0) == pytest.approx(BOX3_PI8_AT_0, abs=1e-6)
    w = rect_widths(Generator.box3().directions, math.pi / 8)
    assert convolved_rects(w, [0.0])[0] == pytest.approx(BOX3_PI8_AT_0, abs=1e-6)


@given(thetas, st.floats(-2.5, 2.5))
def test_engine_matches_high_precision_sum(theta, y):
    for g in GENERATORS:
        w = rect_widths(g.directions, theta)
        if min(w) < 1e-6:
            continue  # nearly degenerate sums lose precision even at 50 digits
        ref = truncated_power_mp(w, y)
        assert eval_profile(project_generator(g, theta), y) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("theta", [0.0, 0.1, math.pi / 8, 0.7, math.pi / 4, 2.0, 1e-10])
def test_engine_matches_numerical_convolution(gen, theta):
    ys = np.linspace(-2.0, 2.0, 41)
    w = rect_widths(gen.directions, theta)
    ref = convolved_rects(w, ys)
    got = eval_profile(project_generator(gen, theta), ys)
    # the oracle smears jump discontinuities over one grid step
    mask = np.ones_like(ys, dtype=bool)
    if sum(x > 1e-9 for x in w) == 1:
        mask = np.abs(np.abs(ys) - 0.5 * sum(w)) > 1e-3
    np.testing.assert_allclose(got[mask], ref[mask], atol=1e-6)


@pytest.mark.parametrize("theta, y", [(0.3, 0.1), (1.1, -0.4), (2.5, 0.8), (math.pi / 4, 0.25)])
def test_engine_matches_line_integral(gen, theta, y):
    ref = line_integral_2d(lambda x: eval_generator_2d(gen, x), theta, y, 3.0)
    assert eval_profile(project_generator(gen, theta), y) == pytest.approx(ref, abs=1e-5)


def test_box3_fast_defers_near_degenerate_angles():
    for theta in (0.0, 1e-12, math.pi / 2, math.pi, -1e-11):
        for y in (-0.6, 0.0, 0.2, 0.45):
            assert eval_box3_fast(theta, y) == pytest.approx(
                eval_profile(project_generator(Generator.box3(), theta), y), abs=1e-12)


def test_box3_fast_matches_engine_at_pi_over_8():
    eng = eval_profile(project_generator(Generator.box3(), math.pi / 8), 0.0)
    assert eval_box3_fast(math.pi / 8, 0.0) == pytest.approx(eng, abs=1e-13)


@given(thetas, st.floats(-2.0, 2.0))
def test_box3_fast_is_even(theta, y):
    assert eval_box3_fast(theta, y) == pytest.approx(eval_box3_fast(theta, -y), abs=1e-12)


@given(thetas, st.floats(-3.0, 3.0))
def test_fast_paths_match_engine(theta, y):
    pairs = [
        (eval_box3_fast, Generator.box3()),
        (eval_tensor_bspline1_fast, Generator.tensor_bspline(1)),
        (eval_tensor_bspline2_fast, Generator.tensor_bspline(2)),
    ]
    for fast, g in pairs:
        assert fast(theta, y) == pytest.approx(eval_profile(project_generator(g, theta), y), abs=1e-12)


def test_tensor_fast_path_at_zero_is_univariate_bspline():
    assert cox_de_boor(0.0, 2) == 0.75
    for y in (0.0, 0.3, -0.9, 1.2, 1.6):
        assert eval_tensor_bspline2_fast(0.0, y) == pytest.approx(cox_de_boor(y, 2), abs=1e-14)
        assert eval_tensor_bspline1_fast(0.0, y) == pytest.approx(cox_de_boor(y, 1), abs=1e-14)
    assert eval_tensor_bspline2_fast(0.0, 0.0) == pytest.approx(0.75, abs=1e-15)


def test_tensor_fast_path_at_quarter_turn():
    eng = eval_profile(project_generator(Generator.tensor_bspline(2), math.pi / 4), 0.0)
    assert eval_tensor_bspline2_fast(math.pi / 4, 0.0) == pytest.approx(eng, abs=1e-14)


@pytest.mark.parametrize("theta", [0.0, 0.2, math.pi / 4, 1.3])
def test_tensor_fast_path_has_unit_mass(theta):
    mass, _ = integrate.quad(lambda y: eval_tensor_bspline2_fast(theta, y), -3.0, 3.0,
                             points=[-1.5, -0.5, 0.5, 1.5], epsabs=1e-12, limit=200)
    assert mass == pytest.approx(1.0, abs=1e-8)


@given(st.floats(-3.0, 3.0), st.integers(0, 3))
def test_bspline_matches_recurrence(x, degree):
    if degree == 0 and abs(abs(x) - 0.5) < 1e-12:
        return
    assert float(bspline_1d(x, degree)) == pytest.approx(cox_de_boor(x, degree), abs=1e-13)


def test_support_geometry():
    pix = Generator.pixel()
    assert support_radius(pix) == pytest.approx(math.sqrt(0.5))
    assert octagon_girth(pix) == 1.0
    assert octagon_girth(Generator.box4()) == 3.0
    v = support_vertices(Generator.tensor_bspline(2))
    assert np.abs(v).max(axis=0) == pytest.approx([1.5, 1.5])
    # the square support of width 3 pokes through the diagonal faces of the L=3 octagon
    assert octagon_girth(Generator.tensor_bspline(2)) == 5.0


def test_neighbor_counts():
    counts = {g.name: neighbor_count(g) for g in GENERATORS}
    assert counts == {"pixel": 0, "box3": 1, "box4": 1, "bspline1": 1, "bspline2": 2}
    assert octagon_neighbor_bound(3.0) == 1
    assert disk_neighbor_bound(math.sqrt(2.0)) == 1
    assert required_neighbors(Generator.box4()) == 1
    assert trace_margin(Generator.pixel()) == 0
    assert trace_margin(Generator.box4()) > 0


def test_eval_generator_2d_examples():
    assert eval_generator_2d(Generator.pixel(), (0.3, -0.4)) == 1.0
    assert eval_generator_2d(Generator.pixel(), (0.6, 0.0)) == 0.0
    # box3 at the origin, by midpoint quadrature (step 1e-3) of its defining
    # convolution of the pixel with a diagonal segment
    ts = (np.arange(1000) + 0.5) / 1000 - 0.5
    ref = np.mean([eval_generator_2d(Generator.pixel(), (-t, -t)) for t in ts])
    assert eval_generator_2d(Generator.box3(), (0.0, 0.0)) == pytest.approx(ref, abs=1e-9)


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_partition_of_unity(x1, x2):
    for g in GENERATORS[1:]:
        total = sum(
            eval_generator_2d(g, (x1 - a, x2 - b))
            for a in range(math.floor(x1) - 3, math.floor(x1) + 4)
            for b in range(math.floor(x2) - 3, math.floor(x2) + 4)
        )
        assert total == pytest.approx(1.0, abs=1e-9)


def test_generic_generator_matches_named_one():
    box3 = Generator.box3()
    gen = Generator.generic(box3.directions)
    for x in [(0.1, 0.2), (-0.4, 0.3), (0.7, 0.9)]:
        assert eval_generator_2d(gen, x) == pytest.approx(eval_generator_2d(box3, x), abs=1e-9)
    prof_a = project_generator(gen, 0.37)
    prof_b = project_generator(box3, 0.37)
    assert eval_profile(prof_a, 0.2) == eval_profile(prof_b, 0.2)


def test_fourier_hat_examples(gen):
    assert fourier_hat(gen, (0.0, 0.0)) == 1.0
    assert abs(fourier_hat(Generator.pixel(), (2 * math.pi, 0.0))) < 1e-15


@pytest.mark.parametrize("theta", [0.25, math.pi / 8, 1.2])
@pytest.mark.parametrize("omega", [0.5, 2.0, 5.0])
def test_fourier_slice(theta, omega):
    g = Generator.box3()
    prof = project_generator(g, theta)
    xi = omega * np.array([math.sin(theta), -math.cos(theta)])
    assert profile_fourier(prof, omega) == pytest.approx(fourier_hat(g, xi), abs=1e-6)


@pytest.mark.parametrize("theta", np.linspace(0, math.pi, 9))
def test_profiles_have_unit_mass(gen, theta):
    prof = project_generator(gen, theta)
    lo, hi = prof.support
    knots = sorted(set(np.round(np.concatenate([prof.knots - prof.center_shift, [lo, hi]]), 14)))
    mass = sum(
        integrate.quad(lambda y: eval_profile(prof, y), a, b, epsabs=1e-13)[0]
        for a, b in zip(knots[:-1], knots[1:]) if b > a
    )
    assert mass == pytest.approx(1.0, abs=1e-8)

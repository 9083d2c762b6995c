import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.interpolate import CubicSpline

from neuralspline.data import Dataset
from neuralspline.errors import InputError
from neuralspline.splines import (
    CanonicalSpline, connect_the_dots, eval_spline, load_spline, natural_cubic,
    natural_moments, one_sided_power, save_spline, spline_seminorm)

HAT = Dataset([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])


@st.composite
def datasets(draw, min_size=3):
    n = draw(st.integers(min_size, 12))
    gaps = draw(st.lists(st.floats(0.05, 2.0), min_size=n - 1, max_size=n - 1))
    x0 = draw(st.floats(-5, 5))
    x = x0 + np.concatenate([[0.0], np.cumsum(gaps)])
    y = draw(st.lists(st.floats(-10, 10), min_size=n, max_size=n))
    return Dataset(x, y)


def test_eval_examples():
    assert eval_spline(CanonicalSpline(2, [], [], [1, 2]), 3.0) == 7.0
    assert eval_spline(CanonicalSpline(2, [0], [2], [0, 0]), 1.0) == 2.0
    assert eval_spline(CanonicalSpline(4, [0], [6], [0, 0, 0, 0]), 2.0) == pytest.approx(8.0, rel=1e-15)


def test_one_sided_power_normalization():
    assert one_sided_power(2.0, 4) == pytest.approx(8 / 6)
    assert one_sided_power(-1.0, 3) == 0.0
    assert one_sided_power(0.0, 1) == 1.0


def test_spline_validation():
    with pytest.raises(ValueError):
        CanonicalSpline(2, [1, 0], [1, 1], [0, 0])
    with pytest.raises(ValueError):
        CanonicalSpline(2, [0], [1, 2], [0, 0])
    with pytest.raises(ValueError):
        CanonicalSpline(4, [0], [1], [0, 0])


def test_seminorm_examples():
    assert spline_seminorm(connect_the_dots(HAT)) == 2.0
    assert spline_seminorm(CanonicalSpline(2, [], [], [0, 0])) == 0.0
    assert spline_seminorm(CanonicalSpline(2, [0, 1], [3, -4], [0, 0])) == 7.0


def test_connect_the_dots_examples():
    s = connect_the_dots(HAT)
    assert list(s.knots) == [1.0] and list(s.coeffs) == [-2.0]
    line = connect_the_dots(Dataset([0, 1, 2, 3], [1, 3, 5, 7]))
    assert len(line) == 0 and line.poly == pytest.approx([1.0, 2.0])
    two = connect_the_dots(Dataset([0, 1], [0, 1]))
    assert len(two) == 0 and list(two.poly) == [0.0, 1.0]


@given(datasets(min_size=2))
def test_connect_the_dots_matches_interp(data):
    s = connect_the_dots(data)
    xs = np.linspace(data.x[0], data.x[-1], 500)
    err = np.abs(s(xs) - np.interp(xs, data.x, data.y))
    assert np.all(err <= 1e-12 * _abs_terms(s, xs) + _prune_floor(data))


def test_natural_cubic_hat():
    assert natural_moments(HAT.x, HAT.y)[1] == pytest.approx(-3.0)
    s = natural_cubic(HAT)
    assert s(HAT.x) == pytest.approx(HAT.y, abs=1e-14)
    h = 1e-4
    for x0 in (0.0, 2.0):
        second = (s(x0 + h) - 2 * s(x0) + s(x0 - h)) / h ** 2
        assert abs(second) < 1e-6


def test_natural_cubic_affine():
    s = natural_cubic(Dataset([0, 0.5, 2, 3], [1, 2, 5, 7]))
    assert spline_seminorm(s) == 0.0
    assert s(10.0) == pytest.approx(21.0)


def test_natural_cubic_needs_three_points():
    with pytest.raises(InputError):
        natural_cubic(Dataset([0, 1], [0, 1]))


@given(datasets())
def test_natural_cubic_matches_scipy(data):
    ref = CubicSpline(data.x, data.y, bc_type="natural")
    s = natural_cubic(data)
    xs = np.linspace(data.x[0], data.x[-1], 400)
    scale = 1 + np.max(np.abs(ref(xs)))
    assert np.max(np.abs(s(xs) - ref(xs))) <= 1e-8 * scale
    # canonical weights are the third-derivative jumps of the reference piecewise cubic
    third = 6 * ref.c[0]
    assert s.knots.size <= data.x.size - 2
    jumps = dict(zip(s.knots, s.coeffs))
    for k, jump in zip(data.x[1:-1], np.diff(third)):
        assert jumps.get(k, 0.0) == pytest.approx(jump, rel=1e-7, abs=1e-7 * np.max(np.abs(third)))


def _abs_terms(s: CanonicalSpline, x):
    """Evaluation with every term replaced by its magnitude: the rounding scale of ``s(x)``."""
    x = np.asarray(x, dtype=float)
    poly = sum(abs(c) * np.abs(x) ** j for j, c in enumerate(s.poly))
    return poly + one_sided_power(x[:, None] - s.knots[None, :], s.gamma) @ np.abs(s.coeffs)


def _prune_floor(data: Dataset) -> float:
    # atoms below PRUNE_RTOL times the largest slope are dropped; bound their effect over the span
    slopes = np.abs(np.diff(data.y) / np.diff(data.x))
    return 4e-12 * np.max(slopes, initial=0.0) * (data.x[-1] - data.x[0]) * data.x.size


def _second_derivative(s: CanonicalSpline, x0):
    return 2 * s.poly[2] + 6 * s.poly[3] * x0 + np.sum(s.coeffs * np.maximum(x0 - s.knots, 0))


@given(datasets())
def test_natural_cubic_interpolates_and_is_natural(data):
    s = natural_cubic(data)
    assert np.all(np.abs(s(data.x) - data.y) <= 1e-12 * _abs_terms(s, data.x))
    moments = natural_moments(data.x, data.y)
    for x0 in (data.x[0], data.x[-1]):
        assert abs(_second_derivative(s, x0)) <= 1e-9 * (1 + np.max(np.abs(moments)))


@given(datasets(min_size=2))
def test_connect_the_dots_interpolates(data):
    s = connect_the_dots(data)
    err = np.abs(s(data.x) - data.y)
    assert np.all(err <= 1e-12 * _abs_terms(s, data.x) + _prune_floor(data))


def test_natural_cubic_boundary_finite_difference():
    rng = np.random.default_rng(7)
    data = Dataset((np.arange(9) + rng.uniform(0.2, 0.8, 9)) / 9, rng.normal(size=9))
    s = natural_cubic(data)
    h = 1e-2
    for x0 in (data.x[0], data.x[-1]):
        # the end pieces extend as the same cubic, so the central difference has no truncation error
        second = (s(x0 + h) - 2 * s(x0) + s(x0 - h)) / h ** 2
        assert abs(second) <= 1e-9


def test_natural_cubic_boundary_second_derivative_analytic():
    rng = np.random.default_rng(3)
    data = Dataset(np.sort(rng.uniform(0, 1, 9)), rng.normal(size=9))
    s = natural_cubic(data)
    for x0 in (data.x[0], data.x[-1]):
        assert abs(_second_derivative(s, x0)) <= 1e-9 * (1 + np.max(np.abs(s.coeffs)))


@pytest.mark.parametrize("gamma", [2, 3, 4])
def test_finite_difference_recovers_coefficients(gamma):
    s = CanonicalSpline(gamma, [-0.5, 0.25, 1.0], [1.5, -2.0, 0.75], np.arange(1, gamma + 1))
    h = 1e-3
    weights = [(-1) ** (gamma - j) * math.comb(gamma, j) for j in range(gamma + 1)]
    for knot, c in zip(s.knots, s.coeffs):
        xs = knot + h * np.arange(-20, 20)
        diff = sum(wj * s(xs + j * h) for j, wj in enumerate(weights))
        # summing the gamma-th difference over a window around the knot integrates D^gamma s
        assert diff.sum() / h ** (gamma - 1) == pytest.approx(c, rel=1e-2)


def test_save_load_round_trip(tmp_path):
    s = natural_cubic(Dataset([0.1, 0.35, 0.8, 1.3], [0.2, -1 / 3, 2.5, 0.0]))
    save_spline(s, tmp_path / "s.txt")
    t = load_spline(tmp_path / "s.txt")
    assert t.gamma == s.gamma
    for name in ("knots", "coeffs", "poly"):
        assert np.array_equal(getattr(t, name), getattr(s, name))
    (tmp_path / "bad.txt").write_text("2 1\nfoo 1\n0 0\n")
    with pytest.raises(InputError):
        load_spline(tmp_path / "bad.txt")

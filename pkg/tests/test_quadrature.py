import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpentagon.errors import DecayViolation
from qpentagon.quadrature import (
    ChargeWindow,
    CircleGrid,
    SumIntegralResult,
    charge_sum_integral,
    charge_tail,
    circle_integral,
)


def test_grid_points_are_roots_of_unity():
    g = CircleGrid(16)
    np.testing.assert_allclose(np.abs(g.points), 1.0, atol=1e-15)
    np.testing.assert_allclose(g.points**16, 1.0, atol=1e-13)
    assert g.doubled().n_points == 32 and g.halved().n_points == 8


def test_invalid_sizes():
    with pytest.raises(ValueError):
        CircleGrid(0)
    with pytest.raises(ValueError):
        ChargeWindow(-1)
    with pytest.raises(ValueError):
        SumIntegralResult(0j, float("inf"), 0.0)


def test_constant_integrand():
    assert circle_integral(lambda z: 1.0, CircleGrid(7)) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [16, 64, 256])
def test_monomials_vanish(n):
    grid = CircleGrid(n)
    worst = max(abs(circle_integral(lambda z, k=k: z**k, grid))
                for k in list(range(1, n)) + list(range(-n + 1, 0)))
    assert worst <= 1e-14


def test_geometric_series_refinement():
    f = lambda z: 1.0 / (1.0 - 0.5 * z)  # noqa: E731
    # aliasing error of the N-point rule is exactly 0.5**N / (1 - 0.5**N)
    for n in (16, 32):
        assert circle_integral(f, CircleGrid(n)) == pytest.approx(1 / (1 - 0.5**n), rel=1e-15)
    assert abs(circle_integral(f, CircleGrid(64)) - circle_integral(f, CircleGrid(128))) <= 1e-14
    assert circle_integral(f, CircleGrid(64)) == pytest.approx(1.0, abs=1e-14)


def test_delta_charge():
    res = charge_sum_integral(lambda z, m: np.full_like(z, float(m == 0)), CircleGrid(8), ChargeWindow(5))
    assert res.value == 1.0
    # only the summation roundoff floor remains
    assert res.charge_tail_estimate <= 11 * np.finfo(float).eps


def test_geometric_charge_sum():
    c = 0.3
    res = charge_sum_integral(lambda z, m: np.full_like(z, c ** abs(m)), CircleGrid(8), ChargeWindow(40))
    assert res.value == pytest.approx((1 + c) / (1 - c), rel=1e-12)


def test_tail_estimate_bounds_widening():
    c = 0.6
    f = lambda z, m: (c ** abs(m)) / (1 - 0.3 * z)  # noqa: E731
    narrow = charge_sum_integral(f, CircleGrid(64), ChargeWindow(10))
    wide = charge_sum_integral(f, CircleGrid(64), ChargeWindow(14))
    assert abs(wide.value - narrow.value) <= narrow.charge_tail_estimate
    exact_tail = 2 * c**11 / (1 - c)
    assert narrow.charge_tail_estimate == pytest.approx(exact_tail, rel=1e-10)


def test_quadrature_estimate_is_half_grid_difference():
    f = lambda z, m: np.where(m == 0, 1.0 / (1 - 0.9 * z), 0.0)  # noqa: E731
    res = charge_sum_integral(f, CircleGrid(32), ChargeWindow(0))
    half = circle_integral(lambda z: 1.0 / (1 - 0.9 * z), CircleGrid(16))
    assert res.quadrature_error_estimate == pytest.approx(abs(res.value - half))


def test_decay_violation():
    with pytest.raises(DecayViolation):
        charge_sum_integral(lambda z, m: np.full_like(z, 1.1 ** abs(m)), CircleGrid(4), ChargeWindow(6))


def test_tail_uses_both_sides():
    charges = list(range(-4, 5))
    shells = [0.0] * 5 + [0.5 ** k for k in range(1, 5)]
    # negative side is identically zero, positive side decays by 1/2
    assert charge_tail(shells, charges) == pytest.approx(0.5**4)


@given(st.integers(1, 40), st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
@settings(max_examples=50, deadline=None)
def test_trapezoid_exact_on_low_degree(k, re, im):
    grid = CircleGrid(2 * k + 1)
    c = complex(re, im)
    val = circle_integral(lambda z: c + z**k - 2 * z**-k, grid)
    assert abs(val - c) <= 1e-13

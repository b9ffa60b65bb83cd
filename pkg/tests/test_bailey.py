import cmath

import numpy as np
import pytest

from qpentagon.bailey import (
    DEFAULT_PROBES,
    BaileyParams,
    TestSequence,
    bailey_moduli,
    beta_on_grid,
    kernel_action,
    lemma_check,
    lemma_probes,
    primed_alpha,
    primed_beta_direct,
    primed_beta_via_chain,
)
from qpentagon.errors import ConstraintViolation
from qpentagon.identities import relative_residual
from qpentagon.qkernel import ChargedFugacity, Nome, b_kernel
from qpentagon.quadrature import ChargeWindow, CircleGrid

GRID, WINDOW = CircleGrid(128), ChargeWindow(16)


def params(n_t=1, n_s=-1, w=1.0, s=0.8 * cmath.exp(0.5j), q=0.15):
    t = 0.78 * cmath.exp(-0.9j)
    u = 0.82 * cmath.exp(2.1j)
    return BaileyParams(t, s, u, w, n_t, n_s, -n_t - n_s, Nome(q))


def test_test_sequence_basics():
    seq = TestSequence({0: {1: 1.0, -1: 1.0}, 2: {0: 0.0}})
    assert seq.support == (0,)
    assert seq.degree_bound == 1
    z = np.array([1.0, 1j])
    np.testing.assert_allclose(seq.component(0, z), z + 1 / z)
    np.testing.assert_allclose(seq.component(5, z), 0)


def test_constructor_refuses_charge_imbalance():
    with pytest.raises(ConstraintViolation):
        BaileyParams(0.7, 0.7, 0.7, 1.0, 1, 0, 0, Nome(0.15))


def test_constructor_refuses_moduli():
    with pytest.raises(ConstraintViolation):
        BaileyParams(0.3, 0.3, 0.25, 1.0, 0, 0, 0, Nome(0.3))


def test_moduli_rejection_example():
    mod = bailey_moduli(0.3, 0.3, 0.25, 1.0, 0.3)
    assert mod["t*w"] == pytest.approx(0.3)
    assert mod["q/(s^2 t^2 u)"] > 1


def test_zero_alpha():
    p, zero = params(), TestSequence()
    assert kernel_action(zero, p, 0, 1.0, GRID) == 0
    assert primed_beta_via_chain(zero, p, 0, 1.0, GRID, WINDOW) == 0
    assert primed_beta_direct(zero, p, 0, 1.0, GRID) == 0
    assert primed_alpha(zero, p, 0, 1.0) == 0
    rep = lemma_check(zero, p, DEFAULT_PROBES, GRID, WINDOW)
    assert rep.passed and rep.relative_residual == 0


@pytest.mark.parametrize("m", [0, 1])
def test_kernel_action_reference_values(m):
    p = BaileyParams(0.4, 0.5, 0.5, 1.0, 0, 0, 0, Nome(0.3), strict=False)
    one = TestSequence.monomial(0)
    coarse = kernel_action(one, p, m, 1.0, CircleGrid(64))
    fine = kernel_action(one, p, m, 1.0, CircleGrid(128))
    assert abs(coarse - fine) <= 1e-11 * abs(fine)


def test_kernel_action_linear():
    p = params()
    alpha = TestSequence({-1: {1: 0.3 - 1j}, 0: {0: 1.0}, 1: {-1: 2j}})
    c = 1.7 - 0.4j
    base = kernel_action(alpha, p, 1, 1j, GRID)
    scaled = kernel_action(alpha.scaled(c), p, 1, 1j, GRID)
    assert abs(scaled - c * base) <= 1e-14 * abs(scaled)


def test_beta_grid_matches_kernel_action():
    p = params()
    alpha = TestSequence({0: {1: 1.0}, 1: {0: -0.5j}})
    beta = beta_on_grid(alpha, p, GRID, ChargeWindow(3))
    x = GRID.points
    for m in (-2, 0, 3):
        for j in (0, 17, 90):
            direct = kernel_action(alpha, p, m, x[j], GRID)
            assert beta.at(m)[j] == pytest.approx(direct, rel=1e-12, abs=1e-15)


def test_primed_alpha_multiplier():
    p = BaileyParams(0.4, 0.5, 0.3, 0.9, -1, 0, 1, Nome(0.3), strict=False)
    alpha = TestSequence.monomial(1)
    a = ChargedFugacity(0.4 * 0.3 * 0.9, 1 + 1 - 1, cmath.sqrt(0.4) * cmath.sqrt(0.3) * cmath.sqrt(0.9))
    b = ChargedFugacity(0.25, 0, 0.5)
    expect = b_kernel(a, b, p.nome).value
    assert primed_alpha(alpha, p, 1, 0.9) == pytest.approx(expect, rel=1e-14)


def test_routes_agree_single_component():
    p = params()
    alpha = TestSequence.monomial(0, 1, 1.0)
    chain = primed_beta_via_chain(alpha, p, 0, 1.0, GRID, WINDOW)
    direct = primed_beta_direct(alpha, p, 0, 1.0, GRID)
    assert relative_residual(chain, direct) <= 1e-6


def test_routes_agree_for_symmetric_laurent_component():
    p = params(n_t=0, n_s=1)
    alpha = TestSequence({0: {1: 1.0, -1: 1.0}})
    rep = lemma_check(alpha, p, DEFAULT_PROBES, GRID, WINDOW)
    assert rep.relative_residual <= 1e-6


def test_chain_shell_order_irrelevant():
    from qpentagon.bailey import _chain_result
    from qpentagon.qkernel import DEFAULT_POLICY

    p = params()
    alpha = TestSequence({-1: {0: 1.0}, 1: {1: 0.5j}})
    result, _ = _chain_result(alpha, p, 1, 1j, GRID, WINDOW, DEFAULT_POLICY)
    forward = sum(result.shells)
    backward = sum(reversed(result.shells))
    assert abs(forward - backward) <= 1e-13 * abs(forward)


def test_lemma_linear_in_alpha():
    p = params()
    a1 = TestSequence.monomial(-1, 1, 1.0)
    a2 = TestSequence.monomial(1, -1, 1.0)
    both = TestSequence({-1: {1: 1.0}, 1: {-1: 1.0}})
    for route in (lambda a: primed_beta_direct(a, p, 0, 1j, GRID),
                  lambda a: primed_beta_via_chain(a, p, 0, 1j, GRID, WINDOW)):
        assert route(both) == pytest.approx(route(a1) + route(a2), rel=1e-12)


def test_probe_must_lie_on_circle():
    with pytest.raises(ConstraintViolation):
        primed_beta_direct(TestSequence.monomial(0), params(), 0, 0.9, GRID)


def test_under_resolved_on_tiny_grid():
    alpha = TestSequence({-1: {1: 1.0}, 0: {0: 1.0}, 1: {-1: 1.0}})
    results = lemma_probes(alpha, params(), DEFAULT_PROBES, CircleGrid(8), WINDOW)
    assert max(r.relative_residual for r in results) > 1e-6
    for r in results:
        assert r.relative_residual <= 10 * r.error_budget


@pytest.mark.parametrize("s_mod", [0.9, 0.95, 0.99])
def test_s_to_one_trend(s_mod):
    # route difference stays small as |s| -> 1; the grid grows with 1/(1-|s|)
    p = BaileyParams(0.7, s_mod, 0.7, 1.0, 0, 0, 0, Nome(0.15))
    n_points = 4096 if s_mod > 0.95 else 1024
    alpha = TestSequence.monomial(0, 1, 1.0)
    rep = lemma_check(alpha, p, [(0, 1.0), (1, 1j)], CircleGrid(n_points), ChargeWindow(24))
    assert rep.relative_residual <= 1e-6

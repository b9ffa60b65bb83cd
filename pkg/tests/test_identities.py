import itertools

import numpy as np
import pytest

from qpentagon.errors import ConstraintViolation
from qpentagon.identities import (
    MainIdentityInstance,
    ResidualReport,
    Status,
    lifted_lhs_check,
    main_identity_check,
    main_identity_lhs,
    main_identity_rhs,
    no_abs_identity_check,
    no_abs_identity_lhs,
    no_abs_identity_rhs,
    pentagon_check,
    pentagon_lhs,
    pentagon_rhs,
    pole_distance,
    relative_residual,
)
from qpentagon.qkernel import ChargedFugacity, Nome, qpochhammer
from qpentagon.quadrature import ChargeWindow, CircleGrid
from qpentagon.sampler import SamplerConfig, main_instances

GRID, WINDOW = CircleGrid(256), ChargeWindow(24)


def generic_instance(q=0.3, m=(0, 0, 0), n=(0, 0, 0)):
    a = [0.8 * np.exp(0.4j), 0.85 * np.exp(-1.3j), 0.78 * np.exp(2.2j)]
    b12 = [0.82 * np.exp(0.9j), 0.8 * np.exp(-2.6j)]
    b3 = q / (np.prod(a) * np.prod(b12))
    return MainIdentityInstance.from_values(a, b12 + [b3], m, n, q)


def test_symmetric_point_main():
    inst = MainIdentityInstance.symmetric(0.3)
    rhs = main_identity_rhs(inst).value
    lhs = main_identity_lhs(inst, GRID, WINDOW).value
    assert relative_residual(lhs, rhs) <= 1e-9


def test_charge_shift_main():
    rep = main_identity_check(generic_instance(m=(1, 0, 0), n=(-1, 0, 0)), GRID, WINDOW)
    assert rep.relative_residual <= 1e-9


def test_rejects_unbalanced_fugacities():
    x = 0.3 ** (1 / 6)
    with pytest.raises(ConstraintViolation):
        MainIdentityInstance.from_values((x,) * 3, (x, x, 0.9 * x), (0,) * 3, (0,) * 3, 0.3)


def test_rejects_unbalanced_charges():
    with pytest.raises(ConstraintViolation):
        MainIdentityInstance.symmetric(0.3, m=(1, 0, 0))


def test_rejects_large_modulus():
    with pytest.raises(ConstraintViolation):
        MainIdentityInstance.from_values((1.2, 0.5, 0.5), (0.5, 0.5, 0.3 / 0.0375), (0,) * 3, (0,) * 3, 0.3)


def test_root_of_last_b_is_balanced():
    inst = generic_instance()
    roots = np.prod([f.root for f in inst.a + inst.b])
    assert roots == pytest.approx(-inst.nome.q_half, rel=1e-14)
    for f in inst.a + inst.b:
        assert f.root**2 == pytest.approx(f.fugacity, rel=1e-13)


def test_rhs_zero_charges_reduces():
    inst = generic_instance()
    nome = inst.nome
    expect = 1.0
    for ai in inst.a:
        for bj in inst.b:
            x = ai.fugacity * bj.fugacity
            expect *= qpochhammer(nome.q / x, nome).value / qpochhammer(x, nome).value
    assert main_identity_rhs(inst).value == pytest.approx(expect, rel=1e-13)


def test_no_abs_symmetric_point():
    rep = no_abs_identity_check(MainIdentityInstance.symmetric(0.3), GRID, WINDOW)
    assert rep.passed and rep.relative_residual <= 1e-9


def test_no_abs_zero_charges_matches_main_termwise():
    inst = generic_instance()
    main = main_identity_lhs(inst, GRID, ChargeWindow(0))
    signed = no_abs_identity_lhs(inst, GRID, ChargeWindow(0))
    assert signed.value == pytest.approx(main.value, rel=1e-14)
    assert no_abs_identity_rhs(inst).value == pytest.approx(main_identity_rhs(inst).value, rel=1e-14)


def test_no_abs_holds_on_split_slice():
    cfg = SamplerConfig(q_values=(0.2, 0.35), balance="split", rng_seed=7)
    for inst in main_instances(cfg, 6):
        assert inst.is_split()
        assert no_abs_identity_check(inst, GRID, WINDOW).relative_residual <= 1e-8


def test_no_abs_fails_off_split_slice():
    # the signed-charge form is not gauge invariant off the split slice
    inst = generic_instance(m=(1, 0, 0), n=(-1, 0, 0))
    assert not inst.is_split()
    assert main_identity_check(inst, GRID, WINDOW).passed
    rep = no_abs_identity_check(inst, GRID, WINDOW)
    assert rep.relative_residual > 1e-3
    assert rep.status is Status.FAILED


def test_lifted_lhs_agrees():
    inst = generic_instance(m=(2, -1, 0), n=(-3, 1, 1))
    assert lifted_lhs_check(inst, GRID, WINDOW).relative_residual <= 1e-12


def test_pentagon_symmetric_point():
    assert pentagon_check(MainIdentityInstance.symmetric(0.3), GRID, WINDOW).relative_residual <= 1e-8


def test_pentagon_odd_charge_combination():
    inst = generic_instance(m=(0, 1, 0), n=(0, 0, -1))
    m, n = inst.charges
    assert (n[0] + m[1]) % 2 == 1
    assert pentagon_check(inst, GRID, WINDOW).relative_residual <= 1e-8


def test_pentagon_cross_validates_main():
    inst = generic_instance(m=(1, -2, 0), n=(0, 2, -1))
    main_ratio = main_identity_lhs(inst, GRID, WINDOW).value / main_identity_rhs(inst).value
    pent_ratio = pentagon_lhs(inst, GRID, WINDOW).value / pentagon_rhs(inst).value
    assert abs(main_ratio - pent_ratio) <= 1e-9


def test_pentagon_integrand_is_rescaled_main_integrand():
    # with the charges of the a and b families exchanged, the main integrand
    # differs from the pentagon one by a z- and m-independent factor
    from qpentagon.identities import _main_integrand, _pentagon_integrand
    from qpentagon.qkernel import DEFAULT_POLICY

    inst = generic_instance(m=(1, 0, -1), n=(2, -1, -1))
    m_ch, n_ch = inst.charges
    swapped = MainIdentityInstance(
        tuple(ChargedFugacity(f.fugacity, k, f.root) for f, k in zip(inst.a, n_ch)),
        tuple(ChargedFugacity(f.fugacity, k, f.root) for f, k in zip(inst.b, m_ch)),
        inst.nome,
    )
    z = CircleGrid(16).points
    const = pentagon_rhs(inst).value / main_identity_rhs(swapped).value
    for m in (-2, 0, 3):
        main = _main_integrand(swapped, DEFAULT_POLICY)(z, m).value()
        pent = _pentagon_integrand(inst, DEFAULT_POLICY)(z, m).value()
        np.testing.assert_allclose(pent, const * main, rtol=1e-12)


@pytest.mark.parametrize("order", list(itertools.permutations(range(3)))[1:])
def test_label_permutation(order):
    inst = generic_instance(m=(1, -1, 2), n=(0, -3, 1))
    base = main_identity_check(inst, GRID, WINDOW)
    perm = main_identity_check(inst.permuted(order), GRID, WINDOW)
    assert relative_residual(base.lhs, perm.lhs) <= 1e-12
    assert relative_residual(base.rhs, perm.rhs) <= 1e-12


def test_residual_decreases_with_grid():
    inst = generic_instance(m=(1, 0, 0), n=(0, -1, 0))
    res = [main_identity_check(inst, CircleGrid(n), WINDOW).relative_residual for n in (64, 128, 256)]
    floor = 1e-13
    assert res[1] <= max(res[0], floor) and res[2] <= max(res[1], floor)
    assert res[0] > res[2]


def test_report_status_logic():
    ok = ResidualReport.compare(1.0, 1.0 + 1e-10, 0.0)
    assert ok.passed and ok.status is Status.PASSED
    under = ResidualReport.compare(1.0, 1.0 + 1e-6, 1e-6)
    assert under.passed and under.status is Status.UNDER_RESOLVED
    bad = ResidualReport.compare(1.0, 1.1, 1e-6)
    assert not bad.passed and bad.status is Status.FAILED
    assert ResidualReport.compare(0.0, 0.0, 0.0).relative_residual == 0.0


def test_pole_distance_detects_near_pole():
    q = 0.3
    nome = Nome(q)
    # a_1 b_1 close to 1 puts a right-side denominator factor near zero
    a = [ChargedFugacity(0.999), ChargedFugacity(0.6), ChargedFugacity(0.7)]
    b12 = [ChargedFugacity(0.9995), ChargedFugacity(0.8)]
    b3 = q / (0.999 * 0.6 * 0.7 * 0.9995 * 0.8)
    inst = MainIdentityInstance(tuple(a), tuple(b12) + (ChargedFugacity(b3),), nome)
    assert pole_distance(inst) < 0.01
    assert pole_distance(generic_instance()) > 0.05

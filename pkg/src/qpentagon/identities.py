"""Both sides of the sum/integral identity, its signed-charge form and the
integral pentagon identity, with residual reports.

All three identities are evaluated on a ``MainIdentityInstance``: fugacities
a_i, b_i with charges m_i, n_i obeying

    prod_i a_i b_i = q,        sum_i (m_i + n_i) = 0.

Half-integer powers of the fugacities use the roots carried by each
``ChargedFugacity``.  The identities only hold when those roots multiply to
-q_half, so the instance fixes the root of b_3 from the other five.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import ConstraintViolation
from .qkernel import (
    DEFAULT_POLICY,
    ChargedFugacity,
    ChiralProduct,
    KernelValue,
    Monomial,
    Nome,
    TruncationPolicy,
    b_kernel,
    signed_ratio_array,
)
from .quadrature import ChargeWindow, CircleGrid, SumIntegralResult, charge_sum_integral

BALANCE_TOLERANCE = 1e-14
IDENTITY_TOLERANCE = 1e-8
KERNEL_TOLERANCE = 1e-10
SAFETY_FACTOR = 10.0


@dataclass(frozen=True)
class MainIdentityInstance:
    a: tuple[ChargedFugacity, ChargedFugacity, ChargedFugacity]
    b: tuple[ChargedFugacity, ChargedFugacity, ChargedFugacity]
    nome: Nome

    def __post_init__(self):
        a, b = tuple(self.a), tuple(self.b)
        if len(a) != 3 or len(b) != 3:
            raise ConstraintViolation("need exactly three a and three b fugacities")
        prod = np.prod([f.fugacity for f in a + b])
        if abs(prod - self.nome.q) > BALANCE_TOLERANCE:
            raise ConstraintViolation(
                f"prod a_i b_i = {prod!r} differs from q = {self.nome.q!r}"
            )
        total = sum(f.charge for f in a + b)
        if total != 0:
            raise ConstraintViolation(f"charges sum to {total}, need 0")
        for f in a + b:
            if not abs(f.fugacity) < 1.0:
                raise ConstraintViolation(f"|fugacity| = {abs(f.fugacity)!r} is not < 1")
        others = np.prod([f.root for f in a + b[:2]])
        b3 = ChargedFugacity(b[2].fugacity, b[2].charge, -self.nome.q_half / others)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b[:2] + (b3,))

    @classmethod
    def from_values(cls, a, b, m, n, q: complex, q_half: complex | None = None):
        """Build from plain fugacity and charge triples with principal roots."""
        nome = Nome(q, q_half)
        return cls(
            tuple(ChargedFugacity(x, k) for x, k in zip(a, m)),
            tuple(ChargedFugacity(x, k) for x, k in zip(b, n)),
            nome,
        )

    @classmethod
    def symmetric(cls, q: float, m=(0, 0, 0), n=(0, 0, 0)):
        """a_i = b_i = q**(1/6) with real positive roots."""
        x = q ** (1 / 6)
        return cls.from_values((x,) * 3, (x,) * 3, m, n, q)

    @property
    def charges(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return tuple(f.charge for f in self.a), tuple(f.charge for f in self.b)

    def is_split(self, tol: float = 1e-12) -> bool:
        """True when prod a_i = prod b_i = -q_half and the charges sum to 0 per side."""
        m, n = self.charges
        target = -self.nome.q_half
        pa = np.prod([f.fugacity for f in self.a])
        pb = np.prod([f.fugacity for f in self.b])
        return (sum(m) == 0 and sum(n) == 0
                and abs(pa - target) <= tol and abs(pb - target) <= tol)

    def permuted(self, order: Sequence[int]) -> "MainIdentityInstance":
        """Relabel the (a_i, m_i) triple."""
        return MainIdentityInstance(tuple(self.a[i] for i in order), self.b, self.nome)


class Status(str, Enum):
    PASSED = "PASSED"
    UNDER_RESOLVED = "UNDER_RESOLVED"
    FAILED = "FAILED"


@dataclass(frozen=True)
class ResidualReport:
    lhs: complex
    rhs: complex
    relative_residual: float
    error_budget: float
    passed: bool
    tolerance: float = IDENTITY_TOLERANCE
    safety_factor: float = SAFETY_FACTOR

    @classmethod
    def compare(cls, lhs: complex, rhs: complex, error_budget: float,
                tolerance: float = IDENTITY_TOLERANCE,
                safety_factor: float = SAFETY_FACTOR) -> "ResidualReport":
        res = relative_residual(lhs, rhs)
        passed = bool(res <= max(tolerance, safety_factor * error_budget))
        return cls(complex(lhs), complex(rhs), res, float(error_budget), passed,
                   tolerance, safety_factor)

    @property
    def status(self) -> Status:
        """PASSED within tolerance; UNDER_RESOLVED if only the error budget covers it."""
        if self.relative_residual <= self.tolerance:
            return Status.PASSED
        return Status.UNDER_RESOLVED if self.passed else Status.FAILED


def relative_residual(lhs: complex, rhs: complex) -> float:
    scale = max(abs(lhs), abs(rhs))
    return float(abs(lhs - rhs) / scale) if scale > 0 else 0.0


# --------------------------------------------------------------------------
# evaluation helpers


def _sum_integral(integrand, grid, window):
    """Run charge_sum_integral while collecting the absolute kernel tail."""
    kernel_err = [0.0]

    def f(z, m):
        prod = integrand(z, m)
        vals = prod.value()
        kernel_err[0] += prod.rel_tail * float(np.mean(np.abs(vals)))
        return vals

    result = charge_sum_integral(f, grid, window)
    return result, kernel_err[0]


def _budget(lhs: SumIntegralResult, lhs_kernel: float, rhs: KernelValue) -> float:
    scale = max(abs(lhs.value), abs(rhs.value))
    if scale == 0:
        return 0.0
    total = lhs.quadrature_error_estimate + lhs.charge_tail_estimate + lhs_kernel + rhs.tail_bound
    return total / scale


def _rhs_product(nome, policy, factors) -> KernelValue:
    prod = ChiralProduct(np.ones(1), nome, policy)
    for mono, charge in factors:
        prod.chiral(mono, charge)
    value = complex(prod.value()[0])
    return KernelValue(value, abs(value) * prod.rel_tail)


def _a(f: ChargedFugacity) -> Monomial:
    return Monomial.of(f, 1)


def _b(f: ChargedFugacity) -> Monomial:
    return Monomial.of(f, -1)


# --------------------------------------------------------------------------
# main identity


def _main_integrand(inst, policy, via_signed=False):
    def integrand(z, m):
        prod = ChiralProduct(z, inst.nome, policy)
        for ai, bi in zip(inst.a, inst.b):
            prod.chiral(_a(ai), ai.charge + m, via_signed)
            prod.chiral(_b(bi), bi.charge - m, via_signed)
        return prod
    return integrand


def _main_lhs(inst, grid, window, policy, via_signed=False):
    return _sum_integral(_main_integrand(inst, policy, via_signed), grid, window)


def main_identity_lhs(inst: MainIdentityInstance, grid: CircleGrid, window: ChargeWindow,
                      policy: TruncationPolicy = DEFAULT_POLICY) -> SumIntegralResult:
    """Charge sum of contour integrals of the six-ratio integrand.

    The integrand at shell m is prod_i of the charged factors at (a_i z, m_i + m)
    and (b_i / z, n_i - m), each carrying (-q^{1/2})^{|k|/2} x^{-|k|/2}.
    """
    return _main_lhs(inst, grid, window, policy)[0]


def main_identity_rhs(inst: MainIdentityInstance,
                      policy: TruncationPolicy = DEFAULT_POLICY) -> KernelValue:
    """Nine charged factors at a_i b_j with charge m_i + n_j."""
    factors = [(Monomial.of(ai) * Monomial.of(bj), ai.charge + bj.charge)
               for ai in inst.a for bj in inst.b]
    return _rhs_product(inst.nome, policy, factors)


def main_identity_check(inst: MainIdentityInstance, grid: CircleGrid, window: ChargeWindow,
                        policy: TruncationPolicy = DEFAULT_POLICY,
                        tolerance: float = IDENTITY_TOLERANCE,
                        safety_factor: float = SAFETY_FACTOR) -> ResidualReport:
    lhs, kernel_err = _main_lhs(inst, grid, window, policy)
    rhs = main_identity_rhs(inst, policy)
    return ResidualReport.compare(lhs.value, rhs.value, _budget(lhs, kernel_err, rhs),
                                  tolerance, safety_factor)


# --------------------------------------------------------------------------
# signed-charge form


def _no_abs_integrand(inst, policy):
    def integrand(z, m):
        prod = ChiralProduct(z, inst.nome, policy)
        for ai, bi in zip(inst.a, inst.b):
            prod.signed_chiral(_a(ai), ai.charge + m)
            prod.signed_chiral(_b(bi), bi.charge - m)
        return prod.scale(z ** (-3 * m))
    return integrand


def no_abs_identity_lhs(inst: MainIdentityInstance, grid: CircleGrid, window: ChargeWindow,
                        policy: TruncationPolicy = DEFAULT_POLICY) -> SumIntegralResult:
    """Charge sum of z^{-3m} times the six signed-charge ratios."""
    return _sum_integral(_no_abs_integrand(inst, policy), grid, window)[0]


def no_abs_identity_rhs(inst: MainIdentityInstance,
                        policy: TruncationPolicy = DEFAULT_POLICY) -> KernelValue:
    """prod_{i,j} signed ratio at (a_i b_j, m_i + n_j) over prod a_i^{m_i} b_i^{n_i}."""
    value, rel = 1.0 + 0j, 0.0
    for ai in inst.a:
        for bj in inst.b:
            r, t = signed_ratio_array(ai.fugacity * bj.fugacity, ai.charge + bj.charge,
                                      inst.nome, policy)
            value *= complex(r)
            rel += t
    for f in inst.a + inst.b:
        value /= f.fugacity ** f.charge
    return KernelValue(value, abs(value) * rel)


def no_abs_identity_check(inst: MainIdentityInstance, grid: CircleGrid, window: ChargeWindow,
                          policy: TruncationPolicy = DEFAULT_POLICY,
                          tolerance: float = IDENTITY_TOLERANCE,
                          safety_factor: float = SAFETY_FACTOR) -> ResidualReport:
    lhs, kernel_err = _sum_integral(_no_abs_integrand(inst, policy), grid, window)
    rhs = no_abs_identity_rhs(inst, policy)
    return ResidualReport.compare(lhs.value, rhs.value, _budget(lhs, kernel_err, rhs),
                                  tolerance, safety_factor)


def lifted_lhs_check(inst: MainIdentityInstance, grid: CircleGrid, window: ChargeWindow,
                     policy: TruncationPolicy = DEFAULT_POLICY,
                     tolerance: float = 1e-9,
                     safety_factor: float = SAFETY_FACTOR) -> ResidualReport:
    """Compare the main LHS with the same sum rebuilt from signed ratios.

    Each |k| ratio is replaced by the signed ratio times the elimination
    factor (-x/q_half)^{(|k|-k)/2}; the two sums must agree shell by shell.
    """
    direct, err_direct = _main_lhs(inst, grid, window, policy)
    lifted, err_lifted = _main_lhs(inst, grid, window, policy, via_signed=True)
    scale = max(abs(direct.value), abs(lifted.value))
    budget = (err_direct + err_lifted) / scale if scale else 0.0
    return ResidualReport.compare(direct.value, lifted.value, budget, tolerance, safety_factor)


# --------------------------------------------------------------------------
# pentagon form


def _pentagon_integrand(inst, policy):
    def integrand(z, m):
        prod = ChiralProduct(z, inst.nome, policy)
        for ai, bi in zip(inst.a, inst.b):
            # B[a_i z, n_i + m; b_i / z, m_i - m]
            prod.tetrahedron(_a(ai), bi.charge + m, _b(bi), ai.charge - m)
        return prod
    return integrand


def pentagon_lhs(inst: MainIdentityInstance, grid: CircleGrid, window: ChargeWindow,
                 policy: TruncationPolicy = DEFAULT_POLICY) -> SumIntegralResult:
    return _sum_integral(_pentagon_integrand(inst, policy), grid, window)[0]


def pentagon_rhs(inst: MainIdentityInstance,
                 policy: TruncationPolicy = DEFAULT_POLICY) -> KernelValue:
    """B[a_1b_2, n_1+m_2; a_3b_1, n_3+m_1] B[a_2b_1, n_2+m_1; a_3b_2, n_3+m_2]."""
    (a1, a2, a3), (b1, b2, b3) = inst.a, inst.b

    def cf(a, b, charge):
        return ChargedFugacity(a.fugacity * b.fugacity, charge, a.root * b.root)

    first = b_kernel(cf(a1, b2, b1.charge + a2.charge),
                     cf(a3, b1, b3.charge + a1.charge), inst.nome, policy)
    second = b_kernel(cf(a2, b1, b2.charge + a1.charge),
                      cf(a3, b2, b3.charge + a2.charge), inst.nome, policy)
    value = first.value * second.value
    tail = abs(second.value) * first.tail_bound + abs(first.value) * second.tail_bound
    return KernelValue(value, tail)


def pentagon_check(inst: MainIdentityInstance, grid: CircleGrid, window: ChargeWindow,
                   policy: TruncationPolicy = DEFAULT_POLICY,
                   tolerance: float = IDENTITY_TOLERANCE,
                   safety_factor: float = SAFETY_FACTOR) -> ResidualReport:
    lhs, kernel_err = _sum_integral(_pentagon_integrand(inst, policy), grid, window)
    rhs = pentagon_rhs(inst, policy)
    return ResidualReport.compare(lhs.value, rhs.value, _budget(lhs, kernel_err, rhs),
                                  tolerance, safety_factor)


CHECKS = {
    "main": main_identity_check,
    "no-abs": no_abs_identity_check,
    "pentagon": pentagon_check,
}


# --------------------------------------------------------------------------
# conditioning


def _factor_distance(x: complex, nome: Nome, terms: int = 64) -> float:
    """min_j |1 - x q^j| over the factors that matter for conditioning."""
    qj = nome.q ** np.arange(terms)
    return float(np.min(np.abs(1.0 - x * qj)))


def _charged_distance(x: complex, k: int, nome: Nome, signed: bool = False) -> float:
    shift = nome.q_half ** (k if signed else abs(k))
    return _factor_distance(shift * x, nome)


def pole_distance(inst: MainIdentityInstance) -> float:
    """Smallest distance from a denominator factor to zero over all three forms.

    Covers the six unit-circle factors of the main integrand, the fixed third
    factors of the pentagon integrand, and the denominators of every right
    side.
    """
    nome = inst.nome
    d = [1.0 - abs(f.fugacity) for f in inst.a + inst.b]
    for ai in inst.a:
        for bj in inst.b:
            x, k = ai.fugacity * bj.fugacity, ai.charge + bj.charge
            d.append(_charged_distance(x, k, nome))
            d.append(_charged_distance(x, k, nome, signed=True))
    for ai, bi in zip(inst.a, inst.b):
        x = nome.q / (ai.fugacity * bi.fugacity)
        k = ai.charge + bi.charge
        d.append(_charged_distance(x, k, nome))
    (a1, a2, a3), (b1, b2, b3) = inst.a, inst.b
    for (x1, k1), (x2, k2) in (
        ((a1.fugacity * b2.fugacity, b1.charge + a2.charge),
         (a3.fugacity * b1.fugacity, b3.charge + a1.charge)),
        ((a2.fugacity * b1.fugacity, b2.charge + a1.charge),
         (a3.fugacity * b2.fugacity, b3.charge + a2.charge)),
    ):
        d.append(_charged_distance(x1, k1, nome))
        d.append(_charged_distance(x2, k2, nome))
        d.append(_charged_distance(nome.q / (x1 * x2), k1 + k2, nome))
    return float(min(d))


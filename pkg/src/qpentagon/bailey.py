"""Bailey pairs for the tetrahedron kernel.

A pair of sequences (alpha_n(z), beta_n(w)) is a Bailey pair with respect to t
when

    beta_m(w) = sum_n  contour_int  B[t w/z, m-n+n_t; t z/w, -m+n+n_t] alpha_n(z)

with the measure dz/(2 pi i z) on the unit circle.  The lemma builds a new pair
with respect to s*t from an old one and two extra kernels; here the new beta is
computed both through the old beta (``primed_beta_via_chain``) and from the new
alpha directly (``primed_beta_direct``), and the two are compared.

The beta integral only depends on the ratio x/y of its two circle variables,
so on a uniform grid it is a circular convolution and is evaluated by FFT.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConstraintViolation
from .identities import SAFETY_FACTOR, ResidualReport, relative_residual
from .qkernel import (
    DEFAULT_POLICY,
    ChargedFugacity,
    ChiralProduct,
    Monomial,
    Nome,
    TruncationPolicy,
    b_kernel,
)
from .quadrature import ChargeWindow, CircleGrid, SumIntegralResult, charge_sum_integral

LEMMA_TOLERANCE = 1e-6


@dataclass(frozen=True)
class TestSequence:
    """Finitely supported sequence of Laurent polynomials alpha_n(z).

    ``components`` maps n to {exponent: coefficient}.
    """

    __test__ = False  # not a pytest class

    components: Mapping[int, Mapping[int, complex]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for n, poly in sorted(self.components.items()):
            terms = {int(e): complex(c) for e, c in sorted(poly.items()) if c != 0}
            if terms:
                clean[int(n)] = terms
        object.__setattr__(self, "components", clean)

    @classmethod
    def monomial(cls, n: int, exponent: int = 0, coeff: complex = 1.0) -> "TestSequence":
        return cls({n: {exponent: coeff}})

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(self.components)

    @property
    def degree_bound(self) -> int:
        return max((abs(e) for poly in self.components.values() for e in poly), default=0)

    def component(self, n: int, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for e, c in self.components.get(n, {}).items():
            out = out + c * z**e
        return out

    def scaled(self, factor: complex) -> "TestSequence":
        return TestSequence({n: {e: factor * c for e, c in poly.items()}
                             for n, poly in self.components.items()})


def bailey_moduli(t, s, u, w, q) -> dict[str, float]:
    """Moduli of every fugacity that reaches a kernel denominator."""
    t, s, u, w, q = map(complex, (t, s, u, w, q))
    return {
        "t*w": abs(t * w),
        "t/w": abs(t / w),
        "s*w": abs(s * w),
        "s/w": abs(s / w),
        "u": abs(u),
        "q/(s^2 t^2 u)": abs(q / (s * s * t * t * u)),
        "s*t*w": abs(s * t * w),
        "s*t/w": abs(s * t / w),
        "t*u": abs(t * u),
        "s^2*t*u": abs(s * s * t * u),
    }


@dataclass(frozen=True)
class BaileyParams:
    """Parameters of one lemma step.

    Square roots of t, s, u, w default to the principal branch.  Every kernel
    in the lemma has even total powers of these roots, so the branch does not
    affect any result.  ``strict=False`` skips the moduli checks, for
    evaluating single multipliers outside the convergence region.
    """

    t: complex
    s: complex
    u: complex
    w: complex
    n_t: int
    n_s: int
    n_u: int
    nome: Nome
    strict: bool = True

    def __post_init__(self):
        for name in ("t", "s", "u", "w"):
            value = complex(getattr(self, name))
            if value == 0:
                raise ConstraintViolation(f"{name} must be nonzero")
            object.__setattr__(self, name, value)
        if self.n_u + self.n_s + self.n_t != 0:
            raise ConstraintViolation(
                f"n_u + n_s + n_t = {self.n_u + self.n_s + self.n_t}, need 0"
            )
        if self.strict:
            bad = {k: v for k, v in self.moduli().items() if not v < 1.0}
            if bad:
                raise ConstraintViolation(f"moduli constraints violated: {bad}")

    def moduli(self) -> dict[str, float]:
        return bailey_moduli(self.t, self.s, self.u, self.w, self.nome.q)

    def root(self, name: str) -> complex:
        return cmath.sqrt(getattr(self, name))

    def mono(self, power: int, **exps: int) -> Monomial:
        """Monomial prod_v v**exps[v] * z**power with the matching root product."""
        coeff, root = 1.0 + 0j, 1.0 + 0j
        for name, e in exps.items():
            coeff *= getattr(self, name) ** e
            root *= self.root(name) ** e
        return Monomial(coeff, root, power)


@dataclass(frozen=True)
class BetaFunction:
    """beta_m sampled on ``grid.points`` for every m in ``window.charges``."""

    grid: CircleGrid
    window: ChargeWindow
    values: np.ndarray = field(repr=False)
    rel_tail: float = 0.0

    def at(self, m: int) -> np.ndarray:
        if abs(m) > self.window.m_max:
            raise KeyError(f"charge {m} outside the beta window")
        return self.values[m + self.window.m_max]


def _check_circle(w: complex):
    if abs(abs(w) - 1.0) > 1e-12:
        raise ConstraintViolation(f"probe point must lie on the unit circle, |w| = {abs(w)!r}")


def _support_integral(terms, grid: CircleGrid):
    """Sum over a finite support of contour integrals, with a half-grid estimate."""
    z = grid.points
    value, half, kernel_err = 0j, 0j, 0.0
    for integrand in terms:
        prod = integrand(z)
        fz = prod.value()
        value += complex(np.mean(fz))
        half += complex(np.mean(fz[::2])) if grid.n_points > 1 else complex(np.mean(fz))
        kernel_err += prod.rel_tail * float(np.mean(np.abs(fz)))
    return SumIntegralResult(value, abs(value - half), 0.0), kernel_err


# --------------------------------------------------------------------------
# the defining kernel action


def kernel_action(alpha: TestSequence, params: BaileyParams, m: int, w: complex | None = None,
                  grid: CircleGrid = CircleGrid(128),
                  policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """beta_m(w) = sum_n contour_int B[t w/z, m-n+n_t; t z/w, n-m+n_t] alpha_n(z)."""
    w = params.w if w is None else complex(w)
    _check_circle(w)
    p = params
    shifted = BaileyParams(p.t, p.s, p.u, w, p.n_t, p.n_s, p.n_u, p.nome, strict=False)

    def term(n):
        def integrand(z):
            prod = ChiralProduct(z, p.nome, policy)
            prod.tetrahedron(shifted.mono(-1, t=1, w=1), m - n + p.n_t,
                             shifted.mono(1, t=1, w=-1), n - m + p.n_t)
            return prod.scale(alpha.component(n, z))
        return integrand

    return _support_integral([term(n) for n in alpha.support], grid)[0].value


def beta_on_grid(alpha: TestSequence, params: BaileyParams, grid: CircleGrid,
                 window: ChargeWindow, policy: TruncationPolicy = DEFAULT_POLICY) -> BetaFunction:
    """beta_m(x) at every grid point x for |m| <= m_max, by circular convolution.

    The kernel B[t v, c+n_t; t/v, -c+n_t] is tabulated once per charge
    difference c = m - n on v = roots of unity.
    """
    p = params
    v = grid.points
    kernels, rel_tail = {}, 0.0
    values = np.zeros((len(window.charges), grid.n_points), dtype=complex)
    alpha_hat = {n: np.fft.fft(alpha.component(n, v)) for n in alpha.support}
    for i, m in enumerate(window.charges):
        acc = np.zeros(grid.n_points, dtype=complex)
        for n in alpha.support:
            c = m - n
            if c not in kernels:
                prod = ChiralProduct(v, p.nome, policy)
                prod.tetrahedron(p.mono(1, t=1), c + p.n_t, p.mono(-1, t=1), -c + p.n_t)
                kernels[c] = np.fft.fft(prod.value())
                rel_tail = max(rel_tail, prod.rel_tail)
            acc += kernels[c] * alpha_hat[n]
        values[i] = np.fft.ifft(acc) / grid.n_points
    return BetaFunction(grid, window, values, rel_tail)


# --------------------------------------------------------------------------
# the lemma


def primed_alpha(alpha: TestSequence, params: BaileyParams, n: int, w: complex,
                 policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """alpha'_n(w) = B[t u w, n+n_u+n_t; s^2, 2 n_s] alpha_n(w)."""
    p = params
    w = complex(w)
    a = ChargedFugacity(p.t * p.u * w, n + p.n_u + p.n_t,
                        p.root("t") * p.root("u") * cmath.sqrt(w))
    b = ChargedFugacity(p.s * p.s, 2 * p.n_s, p.s)
    return b_kernel(a, b, p.nome, policy).value * complex(alpha.component(n, w))


def _chain_result(alpha, params, n, w, grid, window, policy, beta=None):
    p = params
    if beta is None:
        beta = beta_on_grid(alpha, p, grid, window, policy)
    q = BaileyParams(p.t, p.s, p.u, w, p.n_t, p.n_s, p.n_u, p.nome, strict=False)
    kernel_err = [0.0]

    def f(x, m):
        prod = ChiralProduct(x, p.nome, policy)
        # B[s w/x, n-m+n_s; u x, m+n_u]
        prod.tetrahedron(q.mono(-1, s=1, w=1), n - m + p.n_s, q.mono(1, u=1), m + p.n_u)
        # B[s t^2 u w, n+2n_t+n_u+n_s; s x/w, m-n+n_s]
        prod.tetrahedron(q.mono(0, s=1, t=2, u=1, w=1), n + 2 * p.n_t + p.n_u + p.n_s,
                         q.mono(1, s=1, w=-1), m - n + p.n_s)
        vals = prod.scale(beta.at(m)).value()
        kernel_err[0] += (prod.rel_tail + beta.rel_tail) * float(np.mean(np.abs(vals)))
        return vals

    return charge_sum_integral(f, grid, window), kernel_err[0]


def _direct_result(alpha, params, n, w, grid, policy):
    p = params
    q = BaileyParams(p.t, p.s, p.u, w, p.n_t, p.n_s, p.n_u, p.nome, strict=False)
    n_st = p.n_s + p.n_t

    def term(k):
        def integrand(y):
            prod = ChiralProduct(y, p.nome, policy)
            # B[s t w/y, n-k+n_s+n_t; s t y/w, k-n+n_s+n_t]
            prod.tetrahedron(q.mono(-1, s=1, t=1, w=1), n - k + n_st,
                             q.mono(1, s=1, t=1, w=-1), k - n + n_st)
            # alpha'_k(y) = B[t u y, k+n_u+n_t; s^2, 2n_s] alpha_k(y)
            prod.tetrahedron(q.mono(1, t=1, u=1), k + p.n_u + p.n_t, q.mono(0, s=2), 2 * p.n_s)
            return prod.scale(alpha.component(k, y))
        return integrand

    return _support_integral([term(k) for k in alpha.support], grid)


def primed_beta_via_chain(alpha: TestSequence, params: BaileyParams, n: int,
                          w: complex | None = None, grid: CircleGrid = CircleGrid(128),
                          window: ChargeWindow = ChargeWindow(16),
                          policy: TruncationPolicy = DEFAULT_POLICY,
                          beta: BetaFunction | None = None) -> complex:
    """beta'_n(w) through the old beta_m(x) and the two lemma kernels.

    ``beta`` may be passed to reuse a tabulated beta across probes.
    """
    w = params.w if w is None else complex(w)
    _check_circle(w)
    return _chain_result(alpha, params, n, w, grid, window, policy, beta)[0].value


def primed_beta_direct(alpha: TestSequence, params: BaileyParams, n: int,
                       w: complex | None = None, grid: CircleGrid = CircleGrid(128),
                       policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """beta'_n(w) from alpha' with the kernel at parameter s t."""
    w = params.w if w is None else complex(w)
    _check_circle(w)
    return _direct_result(alpha, params, n, w, grid, policy)[0].value


@dataclass(frozen=True)
class ProbeResult:
    n: int
    w: complex
    chain: complex
    direct: complex
    relative_residual: float
    error_budget: float


def lemma_probes(alpha: TestSequence, params: BaileyParams, probes: Iterable[tuple[int, complex]],
                 grid: CircleGrid, window: ChargeWindow,
                 policy: TruncationPolicy = DEFAULT_POLICY) -> list[ProbeResult]:
    beta = beta_on_grid(alpha, params, grid, window, policy)
    out = []
    for n, w in probes:
        w = complex(w)
        _check_circle(w)
        chain, err_c = _chain_result(alpha, params, n, w, grid, window, policy, beta)
        direct, err_d = _direct_result(alpha, params, n, w, grid, policy)
        scale = max(abs(chain.value), abs(direct.value))
        total = (chain.quadrature_error_estimate + chain.charge_tail_estimate + err_c
                 + direct.quadrature_error_estimate + err_d)
        out.append(ProbeResult(n, w, chain.value, direct.value,
                               relative_residual(chain.value, direct.value),
                               total / scale if scale else 0.0))
    return out


def lemma_check(alpha: TestSequence, params: BaileyParams, probes: Sequence[tuple[int, complex]],
                grid: CircleGrid, window: ChargeWindow,
                policy: TruncationPolicy = DEFAULT_POLICY,
                tolerance: float = LEMMA_TOLERANCE,
                safety_factor: float = SAFETY_FACTOR) -> ResidualReport:
    """Worst probe of the chain-versus-direct comparison."""
    results = lemma_probes(alpha, params, probes, grid, window, policy)
    if not results:
        raise ValueError("need at least one probe")
    worst = max(results, key=lambda r: r.relative_residual)
    budget = max(r.error_budget for r in results)
    return ResidualReport.compare(worst.chain, worst.direct, budget, tolerance, safety_factor)


DEFAULT_PROBES = tuple((n, w) for n in (-1, 0, 1) for w in (1.0, 1j))

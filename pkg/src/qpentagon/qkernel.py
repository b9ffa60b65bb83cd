"""q-Pochhammer symbols, charged ratios and the tetrahedron kernel B[a,n;b,m].

All infinite products are truncated adaptively from a geometric bound on the
logarithm of the discarded tail, so every returned value carries a certified
truncation bound.

Branch conventions
------------------
Half-integer powers of q are integer powers of ``Nome.q_half``.  Half-integer
powers of a fugacity are integer powers of a square root carried alongside it
(``ChargedFugacity.root``).  Products of fugacities multiply their roots, which
keeps every factor of a composite expression on one consistent branch.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConstraintViolation, InvalidNome, NonconvergentTail, PoleHit

EPS = np.finfo(float).eps
POLE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Nome:
    """The nome q together with a fixed square root.

    ``q_half`` defaults to ``-sqrt(q)`` (principal root, negated).  With that
    choice ``-q_half`` is the principal root, and the sum/integral identities
    hold with principal roots at the symmetric point a_i = b_i = q**(1/6).
    """

    q: complex
    q_half: complex = None  # type: ignore[assignment]

    def __post_init__(self):
        q = complex(self.q)
        if not 0.0 < abs(q) < 1.0:
            raise InvalidNome(f"need 0 < |q| < 1, got |q| = {abs(q)!r}")
        q_half = -cmath.sqrt(q) if self.q_half is None else complex(self.q_half)
        if abs(q_half * q_half - q) > 8 * EPS * abs(q):
            raise InvalidNome(f"q_half**2 != q (q_half={q_half!r}, q={q!r})")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "q_half", q_half)


@dataclass(frozen=True)
class ChargedFugacity:
    """A nonzero complex fugacity paired with an integer charge.

    ``root`` fixes the square root used for half-integer powers of the
    fugacity; it defaults to the principal branch.
    """

    fugacity: complex
    charge: int = 0
    root: complex = None  # type: ignore[assignment]

    def __post_init__(self):
        f = complex(self.fugacity)
        if f == 0:
            raise ConstraintViolation("fugacity must be nonzero")
        if int(self.charge) != self.charge:
            raise ConstraintViolation(f"charge must be an integer, got {self.charge!r}")
        r = cmath.sqrt(f) if self.root is None else complex(self.root)
        if abs(r * r - f) > 1e-12 * abs(f):
            raise ConstraintViolation(f"root**2 != fugacity ({r!r}**2 vs {f!r})")
        object.__setattr__(self, "fugacity", f)
        object.__setattr__(self, "charge", int(self.charge))
        object.__setattr__(self, "root", r)

    def times(self, other: "ChargedFugacity") -> "ChargedFugacity":
        """Product fugacity with summed charges and multiplied roots."""
        return ChargedFugacity(
            self.fugacity * other.fugacity,
            self.charge + other.charge,
            self.root * other.root,
        )


@dataclass(frozen=True)
class TruncationPolicy:
    max_terms: int = 4000
    target_tail: float = 1e-15  # relative bound on the discarded tail

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not self.target_tail > 0:
            raise ValueError("target_tail must be > 0")


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class KernelValue:
    value: complex
    tail_bound: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.tail_bound) or self.tail_bound < 0:
            raise ValueError(f"tail_bound must be finite and >= 0, got {self.tail_bound!r}")


# --------------------------------------------------------------------------
# truncated products


def _log_tail_bound(zabs: float, qabs: float, terms: int) -> float:
    """Bound on |log prod_{k>=terms} (1 - z q^k)|, inf when not certifiable."""
    x = zabs * qabs**terms
    if x >= 1.0:
        return math.inf
    return x / ((1.0 - qabs) * (1.0 - x))


def terms_needed(zabs: float, qabs: float, policy: TruncationPolicy) -> int:
    """Smallest K whose tail satisfies expm1(bound) <= target, capped at max_terms."""
    if zabs == 0.0:
        return 1
    lstar = math.log1p(policy.target_tail)
    xstar = lstar * (1.0 - qabs) / (1.0 + lstar * (1.0 - qabs))
    if zabs <= xstar:
        k = 1
    else:
        k = max(1, math.ceil(math.log(xstar / zabs) / math.log(qabs)))
    k = min(k, policy.max_terms)
    if zabs * qabs**k >= 1.0:
        raise NonconvergentTail(
            f"|z||q|^K = {zabs * qabs**k:.3g} >= 1 at K = {k}; raise max_terms"
        )
    return k


def _relative_tail(zabs: float, qabs: float, terms: int) -> float:
    # truncation part plus a floating-point allowance for the K-fold product
    return math.expm1(_log_tail_bound(zabs, qabs, terms)) + 4 * terms * EPS


def pochhammer_array(z, nome: Nome, policy: TruncationPolicy = DEFAULT_POLICY):
    """Vectorised (z;q)_inf.

    Returns ``(values, rel_tail, min_factor)`` where ``rel_tail`` bounds the
    relative truncation error over the whole array and ``min_factor`` is the
    smallest |1 - z q^k| seen (for pole detection).
    """
    z = np.asarray(z, dtype=complex)
    qabs = abs(nome.q)
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    k = terms_needed(zmax, qabs, policy)
    factors = 1.0 - z[..., None] * nome.q ** np.arange(k)
    values = factors.prod(axis=-1)
    min_factor = float(np.min(np.abs(factors))) if z.size else 1.0
    rel = _relative_tail(zmax, qabs, k) if zmax > 0 else 0.0
    return values, rel, min_factor


def qpochhammer(z: complex, nome: Nome, policy: TruncationPolicy = DEFAULT_POLICY) -> KernelValue:
    """(z;q)_inf = prod_{k>=0} (1 - z q^k) with a certified truncation bound."""
    z = complex(z)
    if z == 0:
        return KernelValue(1.0 + 0j, 0.0)
    values, rel, _ = pochhammer_array(z, nome, policy)
    value = complex(values)
    return KernelValue(value, abs(value) * rel)


# --------------------------------------------------------------------------
# charged ratios


def _ratio_array(num_arg, den_arg, nome, policy):
    num, num_tail, _ = pochhammer_array(num_arg, nome, policy)
    den, den_tail, den_min = pochhammer_array(den_arg, nome, policy)
    if den_min < POLE_TOLERANCE:
        raise PoleHit(f"denominator Pochhammer factor within {den_min:.2e} of zero")
    return num / den, num_tail + den_tail


def ratio_array(x, k: int, nome: Nome, policy: TruncationPolicy = DEFAULT_POLICY):
    """(q^{1+|k|/2}/x; q)_inf / (q^{|k|/2} x; q)_inf, vectorised over x."""
    x = np.asarray(x, dtype=complex)
    shift = nome.q_half ** abs(k)
    return _ratio_array(nome.q * shift / x, shift * x, nome, policy)


def signed_ratio_array(x, k: int, nome: Nome, policy: TruncationPolicy = DEFAULT_POLICY):
    """(q^{1+k/2}/x; q)_inf / (q^{k/2} x; q)_inf with the signed charge k."""
    x = np.asarray(x, dtype=complex)
    shift = nome.q_half ** int(k)
    return _ratio_array(nome.q * shift / x, shift * x, nome, policy)


def _scalar_ratio(z, m, nome, policy, signed):
    z = complex(z)
    if z == 0:
        raise ConstraintViolation("charged ratio is undefined at z = 0")
    fn = signed_ratio_array if signed else ratio_array
    values, rel = fn(z, m, nome, policy)
    value = complex(values)
    return KernelValue(value, abs(value) * rel)


def charged_ratio(z: complex, m: int, nome: Nome, policy: TruncationPolicy = DEFAULT_POLICY) -> KernelValue:
    """(q^{1+|m|/2}/z; q)_inf / (q^{|m|/2} z; q)_inf."""
    return _scalar_ratio(z, m, nome, policy, signed=False)


def charged_ratio_signed(z: complex, m: int, nome: Nome, policy: TruncationPolicy = DEFAULT_POLICY) -> KernelValue:
    """Same ratio with the signed charge m in place of |m|."""
    return _scalar_ratio(z, m, nome, policy, signed=True)


def abs_elimination_factor(z: complex, m: int, nome: Nome) -> complex:
    """(-z/q_half)**((|m|-m)/2), relating the |m| and signed ratios."""
    return (-complex(z) / nome.q_half) ** ((abs(m) - m) // 2)


# --------------------------------------------------------------------------
# tetrahedron kernel


def b_kernel_prefactor_exponent(n: int, m: int) -> int:
    """Power of (-q_half) in B[a,n;b,m]: (|n| + |m| - |n+m|) / 2."""
    return (abs(n) + abs(m) - abs(n + m)) // 2


def b_kernel(a: ChargedFugacity, b: ChargedFugacity, nome: Nome,
             policy: TruncationPolicy = DEFAULT_POLICY) -> KernelValue:
    """B[a,n;b,m] for charged fugacities a = (a, n) and b = (b, m).

    B = (-q^{1/2})^{(|n|+|m|-|n+m|)/2} a^{-|n|/2} b^{-|m|/2} (ab)^{|n+m|/2}
        * (q^{1+|n|/2}/a, q^{1+|m|/2}/b, q^{|n+m|/2} ab; q)
        / (q^{|n|/2} a, q^{|m|/2} b, q^{1+|n+m|/2}/(ab); q)
    """
    n, m = a.charge, b.charge
    s = abs(n + m)
    ab = a.fugacity * b.fugacity
    ra, rb = a.root, b.root
    pre = (
        (-nome.q_half) ** b_kernel_prefactor_exponent(n, m)
        * ra ** (-abs(n))
        * rb ** (-abs(m))
        * (ra * rb) ** s
    )
    r1, t1 = ratio_array(a.fugacity, n, nome, policy)
    r2, t2 = ratio_array(b.fugacity, m, nome, policy)
    shift = nome.q_half**s
    r3, t3 = _ratio_array(shift * ab, nome.q * shift / ab, nome, policy)
    value = complex(pre * r1 * r2 * r3)
    return KernelValue(value, abs(value) * (t1 + t2 + t3))


# --------------------------------------------------------------------------
# grid-level assembly


class Monomial(NamedTuple):
    """The fugacity coeff * z**power, with ``root`` a square root of coeff."""

    coeff: complex
    root: complex
    power: int = 0

    @classmethod
    def of(cls, f: ChargedFugacity, power: int = 0) -> "Monomial":
        return cls(f.fugacity, f.root, power)

    def __mul__(self, other):
        return Monomial(self.coeff * other.coeff, self.root * other.root, self.power + other.power)


@dataclass
class ChiralProduct:
    """Running product of charged ratios evaluated on grid points ``z``.

    Each charged factor contributes (-q^{1/2})^{|k|/2} x^{-|k|/2} times the
    |k| ratio at x.  The (-q_half) and z exponents are accumulated doubled and
    applied once in :meth:`value`; both must end up integers.
    """

    z: np.ndarray
    nome: Nome
    policy: TruncationPolicy = DEFAULT_POLICY
    values: np.ndarray = field(init=False)
    qhalf_twice: int = field(init=False, default=0)
    z_twice: int = field(init=False, default=0)
    rel_tail: float = field(init=False, default=0.0)

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=complex)
        self.values = np.ones_like(self.z)

    def _arg(self, x: Monomial):
        return x.coeff * self.z**x.power if x.power else np.full_like(self.z, x.coeff)

    def chiral(self, x: Monomial, charge: int, via_signed: bool = False) -> "ChiralProduct":
        """Multiply by one charged factor.

        With ``via_signed`` the |k| ratio is rebuilt from the signed ratio and
        the elimination factor instead of being evaluated directly.
        """
        k = abs(charge)
        arg = self._arg(x)
        if via_signed:
            r, tail = signed_ratio_array(arg, charge, self.nome, self.policy)
            r = r * (-arg / self.nome.q_half) ** ((k - charge) // 2)
        else:
            r, tail = ratio_array(arg, k, self.nome, self.policy)
        self.values = self.values * r * x.root ** (-k)
        self.qhalf_twice += k
        self.z_twice -= x.power * k
        self.rel_tail += tail
        return self

    def signed_chiral(self, x: Monomial, charge: int) -> "ChiralProduct":
        r, tail = signed_ratio_array(self._arg(x), charge, self.nome, self.policy)
        self.values = self.values * r
        self.rel_tail += tail
        return self

    def tetrahedron(self, a: Monomial, n: int, b: Monomial, m: int) -> "ChiralProduct":
        """Multiply by B[a,n;b,m] as three charged factors.

        The third factor sits at q/(ab) with charge -(n+m) and root
        -q_half/(root(a) root(b)).
        """
        third = Monomial(
            self.nome.q / (a.coeff * b.coeff),
            -self.nome.q_half / (a.root * b.root),
            -(a.power + b.power),
        )
        return self.chiral(a, n).chiral(b, m).chiral(third, -(n + m))

    def scale(self, factor) -> "ChiralProduct":
        self.values = self.values * factor
        return self

    def value(self) -> np.ndarray:
        if self.qhalf_twice % 2 or self.z_twice % 2:
            raise ConstraintViolation(
                "half-integer total power of q or z; the charge balance is violated"
            )
        out = self.values * (-self.nome.q_half) ** (self.qhalf_twice // 2)
        if self.z_twice:
            out = out * self.z ** (self.z_twice // 2)
        return out

"""Charge sums of unit-circle contour integrals.

Integrals are taken with the measure dz/(2 pi i z) on the positively oriented
unit circle, discretised by the uniform trapezoid rule on roots of unity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DecayViolation

# shells below this multiple of their own roundoff level count as converged
NOISE_MULTIPLE = 10.0


@dataclass(frozen=True)
class CircleGrid:
    n_points: int

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError("n_points must be positive")

    @property
    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_points) / self.n_points

    @property
    def points(self) -> np.ndarray:
        # built from the first quadrant by exact quarter turns, which keeps
        # powers z**k accurate for large |k|
        j = np.arange(self.n_points)
        quadrant = (4 * j) // self.n_points
        theta = 2 * np.pi * (j - quadrant * self.n_points / 4) / self.n_points
        c, s = np.cos(theta), np.sin(theta)
        re = np.choose(quadrant, [c, -s, -c, s])
        im = np.choose(quadrant, [s, c, -s, -c])
        return re + 1j * im

    def halved(self) -> "CircleGrid":
        return CircleGrid(max(1, self.n_points // 2))

    def doubled(self) -> "CircleGrid":
        return CircleGrid(2 * self.n_points)


@dataclass(frozen=True)
class ChargeWindow:
    m_max: int

    def __post_init__(self):
        if self.m_max < 0:
            raise ValueError("m_max must be >= 0")

    @property
    def charges(self) -> range:
        return range(-self.m_max, self.m_max + 1)

    def widened(self, extra: int) -> "ChargeWindow":
        return ChargeWindow(self.m_max + extra)


@dataclass(frozen=True)
class SumIntegralResult:
    value: complex
    quadrature_error_estimate: float
    charge_tail_estimate: float
    # per-charge contributions, ordered as window.charges
    shells: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.quadrature_error_estimate)
                and math.isfinite(self.charge_tail_estimate)):
            raise ValueError("error estimates must be finite")


def circle_integral(f: Callable[[np.ndarray], np.ndarray], grid: CircleGrid) -> complex:
    """Trapezoid approximation of the contour integral of f(z) dz/(2 pi i z)."""
    return complex(np.mean(np.broadcast_to(f(grid.points), (grid.n_points,))))


def _side_tail(mags, noise) -> float:
    """Geometric extrapolation of the tail beyond the last of ``mags``."""
    if len(mags) < 3:
        return float(mags[-1]) if len(mags) else 0.0
    s0, s1, s2 = mags[-3:]
    if s2 <= NOISE_MULTIPLE * noise:
        return float(s2)
    if s0 == 0 or s1 == 0:
        raise DecayViolation("charge shells vanish and then reappear")
    ratio = max(s1 / s0, s2 / s1)
    if ratio >= 1.0:
        raise DecayViolation(
            f"charge shells stopped decaying at the window edge (ratio {ratio:.3g})"
        )
    return float(s2 * ratio / (1.0 - ratio))


def charge_tail(shells, charges, noise=None) -> float:
    """Tail estimate for a symmetric window from the last three shells per side."""
    shells = np.asarray(shells, dtype=complex)
    charges = np.asarray(charges)
    mags = np.abs(shells)
    if len(charges) == 1:
        return float(mags[0])
    noise = np.zeros_like(mags) if noise is None else np.asarray(noise, dtype=float)
    up = charges >= 0
    down = np.flatnonzero(charges <= 0)[::-1]  # from 0 towards -m_max
    return (_side_tail(mags[up], float(noise[up][-1]))
            + _side_tail(mags[down], float(noise[down][-1])))


def charge_sum_integral(
    f: Callable[[np.ndarray, int], np.ndarray],
    grid: CircleGrid,
    window: ChargeWindow,
) -> SumIntegralResult:
    """Sum over |m| <= m_max of the contour integral of f(z, m).

    The half-resolution value reuses the even-indexed samples, so the
    quadrature estimate |I_N - I_{N/2}| costs no extra evaluations.
    """
    z = grid.points
    shells, half_shells, noise = [], [], []
    for m in window.charges:
        fz = np.broadcast_to(f(z, m), z.shape)
        shells.append(complex(np.mean(fz)))
        half_shells.append(complex(np.mean(fz[::2])) if grid.n_points > 1 else shells[-1])
        noise.append(float(np.mean(np.abs(fz))) * 4 * np.finfo(float).eps * math.sqrt(grid.n_points))
    value = complex(sum(shells))
    quad = abs(value - complex(sum(half_shells)))
    # a converged tail still moves the running sum by rounding, so floor the
    # estimate at the roundoff of adding one more shell per charge
    rounding = np.finfo(float).eps * abs(value) * len(shells)
    tail = charge_tail(shells, list(window.charges), noise) + rounding
    return SumIntegralResult(value, quad, tail, tuple(shells))

"""Reproducible random instances for the identity and Bailey checks.

Everything is drawn by rejection: free parameters are sampled from simple
boxes, the balanced ones are solved for, and the draw is discarded if any
constraint or pole-separation margin fails.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .bailey import BaileyParams, TestSequence, bailey_moduli
from .errors import ConstraintViolation, ExhaustedResampling
from .identities import MainIdentityInstance, pole_distance
from .qkernel import ChargedFugacity, Nome

MAX_REJECTIONS = 10_000
BALANCE_MODES = ("general", "split")


@dataclass(frozen=True)
class SamplerConfig:
    """Sampling boxes and margins.

    ``balance="split"`` restricts to prod a_i = prod b_i = -q_half with
    charges summing to zero on each side separately.
    """

    rng_seed: int = 42
    q_values: tuple[float, ...] = (0.2, 0.35, 0.5)
    charge_range: int = 3
    modulus_band: tuple[float, float] = (0.72, 0.92)
    pole_margin: float = 0.05
    balance: str = "general"
    max_rejections: int = MAX_REJECTIONS

    def __post_init__(self):
        lo, hi = (float(x) for x in self.modulus_band)
        if not 0.0 < lo < hi < 1.0:
            raise ValueError(f"modulus_band must satisfy 0 < r_lo < r_hi < 1, got {self.modulus_band!r}")
        if not self.pole_margin > 0:
            raise ValueError("pole_margin must be > 0")
        if not self.q_values or not all(0.0 < abs(q) < 1.0 for q in self.q_values):
            raise ValueError(f"q_values must be nonempty with 0 < |q| < 1, got {self.q_values!r}")
        if self.charge_range < 0:
            raise ValueError("charge_range must be >= 0")
        if self.balance not in BALANCE_MODES:
            raise ValueError(f"balance must be one of {BALANCE_MODES}, got {self.balance!r}")
        if self.rng_seed < 0 or self.rng_seed >= 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "modulus_band", (lo, hi))
        object.__setattr__(self, "q_values", tuple(self.q_values))

    @classmethod
    def for_bailey(cls, **overrides) -> "SamplerConfig":
        """Defaults that keep every Bailey modulus at or below 0.85."""
        base = dict(q_values=(0.15,), charge_range=2, modulus_band=(0.7, 0.85), pole_margin=0.15)
        base.update(overrides)
        return cls(**base)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.rng_seed)


def _fugacities(rng, band, count):
    r = rng.uniform(band[0], band[1], count)
    phase = rng.uniform(0.0, 2 * np.pi, count)
    return r * np.exp(1j * phase)


def _in_band(x, band) -> bool:
    return band[0] <= abs(x) <= band[1]


def _pick_q(cfg: SamplerConfig, rng) -> complex:
    return cfg.q_values[int(rng.integers(len(cfg.q_values)))]


def _draw_main(cfg: SamplerConfig, rng, q) -> MainIdentityInstance | None:
    nome = Nome(q)
    band, c = cfg.modulus_band, cfg.charge_range
    if cfg.balance == "general":
        f = _fugacities(rng, band, 5)
        b3 = q / np.prod(f)
        charges = [int(k) for k in rng.integers(-c, c + 1, 5)]
        last = -sum(charges)
        if not _in_band(b3, band) or abs(last) > c:
            return None
        a = [ChargedFugacity(x, k) for x, k in zip(f[:3], charges[:3])]
        b = [ChargedFugacity(f[3], charges[3]), ChargedFugacity(f[4], charges[4]),
             ChargedFugacity(b3, last)]
    else:
        target = -nome.q_half
        side_root = cmath.sqrt(target)
        sides = []
        for _ in range(2):
            f = _fugacities(rng, band, 2)
            k = [int(x) for x in rng.integers(-c, c + 1, 2)]
            third = target / (f[0] * f[1])
            k3 = -sum(k)
            if not _in_band(third, band) or abs(k3) > c:
                return None
            fs = [ChargedFugacity(f[0], k[0]), ChargedFugacity(f[1], k[1])]
            root3 = side_root / (fs[0].root * fs[1].root)
            sides.append(fs + [ChargedFugacity(third, k3, root3)])
        a, b = sides
    try:
        inst = MainIdentityInstance(tuple(a), tuple(b), nome)
    except ConstraintViolation:
        return None
    if pole_distance(inst) < cfg.pole_margin:
        return None
    return inst


def sample_main_instance(cfg: SamplerConfig, rng: np.random.Generator | None = None) -> MainIdentityInstance:
    """One balanced instance; ``rng`` defaults to a fresh stream seeded from cfg.

    q is chosen once per instance, before any rejection, so every value in
    ``cfg.q_values`` is equally likely regardless of its acceptance rate.
    """
    rng = cfg.rng() if rng is None else rng
    q = _pick_q(cfg, rng)
    for _ in range(cfg.max_rejections):
        inst = _draw_main(cfg, rng, q)
        if inst is not None:
            return inst
    raise ExhaustedResampling(
        f"no acceptable instance after {cfg.max_rejections} draws; the config is infeasible"
    )


def main_instances(cfg: SamplerConfig, count: int) -> Iterator[MainIdentityInstance]:
    """``count`` instances from one stream seeded by cfg.rng_seed."""
    rng = cfg.rng()
    for _ in range(count):
        yield sample_main_instance(cfg, rng)


def bailey_pole_distance(params: BaileyParams, probe_charges=(-1, 0, 1)) -> float:
    """Distance from zero of the fixed denominator factors, plus 1 - max modulus."""
    p, nome = params, params.nome
    qj = nome.q ** np.arange(64)

    def dist(x, k):
        return float(np.min(np.abs(1.0 - nome.q_half ** abs(k) * x * qj)))

    d = [1.0 - max(p.moduli().values())]
    d.append(dist(nome.q / (p.t * p.t), 2 * p.n_t))
    d.append(dist(p.s * p.s, 2 * p.n_s))
    d.append(dist(nome.q / (p.s * p.s * p.t * p.t), 2 * (p.n_s + p.n_t)))
    for n in probe_charges:
        d.append(dist(p.s * p.t * p.t * p.u * p.w, n + p.n_t))
        d.append(dist(nome.q / (p.s * p.u * p.w), n - p.n_t))
    return min(d)


def _draw_bailey(cfg: SamplerConfig, rng, q, charges=None) -> BaileyParams | None:
    t, s, u = _fugacities(rng, cfg.modulus_band, 3)
    w = complex(np.exp(1j * rng.uniform(0.0, 2 * np.pi)))
    n_t, n_s = (int(k) for k in rng.integers(-cfg.charge_range, cfg.charge_range + 1, 2))
    if charges is not None:
        n_t, n_s = charges[0], charges[1]
        if sum(charges) != 0:
            raise ConstraintViolation(f"n_t + n_s + n_u = {sum(charges)}, need 0")
    if max(bailey_moduli(t, s, u, w, q).values()) > 1.0 - cfg.pole_margin:
        return None
    params = BaileyParams(t, s, u, w, n_t, n_s, -n_t - n_s, Nome(q))
    if bailey_pole_distance(params) < cfg.pole_margin:
        return None
    return params


def sample_bailey_params(cfg: SamplerConfig, rng: np.random.Generator | None = None,
                         charges: tuple[int, int, int] | None = None) -> BaileyParams:
    """t, s, u in the modulus band with random phases, w on the unit circle.

    ``charges`` fixes (n_t, n_s, n_u) instead of drawing n_t, n_s.
    """
    rng = cfg.rng() if rng is None else rng
    q = _pick_q(cfg, rng)
    for _ in range(cfg.max_rejections):
        params = _draw_bailey(cfg, rng, q, charges)
        if params is not None:
            return params
    raise ExhaustedResampling(
        f"no acceptable Bailey parameters after {cfg.max_rejections} draws"
    )


def sample_test_sequence(rng: np.random.Generator, support=(-1, 0, 1), max_exponent: int = 1) -> TestSequence:
    """One Laurent monomial c z^e per support point, c standard complex normal."""
    comps = {}
    for n in support:
        e = int(rng.integers(-max_exponent, max_exponent + 1))
        c = complex(rng.normal(), rng.normal())
        comps[int(n)] = {e: c}
    return TestSequence(comps)


def bailey_draws(cfg: SamplerConfig, count: int, charges=None
                 ) -> Iterator[tuple[BaileyParams, TestSequence]]:
    rng = cfg.rng()
    for _ in range(count):
        params = sample_bailey_params(cfg, rng, charges)
        yield params, sample_test_sequence(rng)


"""Run configuration: a flat ``key = value`` file, environment overrides and
command-line flags.

Precedence, lowest first: built-in defaults, ``QPENT_<KEY>`` environment
variables, the config file, command-line flags.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping

from .bailey import LEMMA_TOLERANCE
from .identities import IDENTITY_TOLERANCE, KERNEL_TOLERANCE, SAFETY_FACTOR
from .qkernel import TruncationPolicy
from .sampler import SamplerConfig

ENV_PREFIX = "QPENT_"
_SECTION = "run"


class ConfigError(ValueError):
    """A config value failed to parse or validate; ``field`` names the key."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field = field_name


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


PARSERS: dict[str, Callable[[str], object]] = {
    "rng_seed": int,
    "q_values": _floats,
    "charge_range": int,
    "modulus_band": _floats,
    "pole_margin": float,
    "balance": str.strip,
    "max_rejections": int,
    "max_terms": int,
    "target_tail": float,
    "grid_points": int,
    "m_max": int,
    "instances": int,
    "identity_tolerance": float,
    "kernel_tolerance": float,
    "lemma_tolerance": float,
    "safety_factor": float,
    "n_t": int,
    "n_s": int,
    "n_u": int,
}


@dataclass(frozen=True)
class RunConfig:
    sampler: SamplerConfig
    policy: TruncationPolicy = TruncationPolicy(target_tail=1e-13)
    grid_points: int = 256
    m_max: int = 24
    instances: int = 200
    identity_tolerance: float = IDENTITY_TOLERANCE
    kernel_tolerance: float = KERNEL_TOLERANCE
    lemma_tolerance: float = LEMMA_TOLERANCE
    safety_factor: float = SAFETY_FACTOR
    # (n_t, n_s, n_u) held fixed for every Bailey draw, when given
    bailey_charges: tuple[int, int, int] | None = None
    sources: tuple[str, ...] = field(default=(), compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("sources")
        return d

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()


VERIFY_DEFAULTS = RunConfig(SamplerConfig())
BAILEY_DEFAULTS = RunConfig(
    SamplerConfig.for_bailey(), policy=TruncationPolicy(), grid_points=128, m_max=16, instances=20
)


def read_file(path: str | os.PathLike) -> dict[str, str]:
    """Parse a flat key/value file (``key = value``, ``#`` comments)."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str.lower
    try:
        parser.read_string(f"[{_SECTION}]\n{text}")
    except configparser.Error as exc:
        raise ConfigError(getattr(exc, "option", None) or "<syntax>", str(exc).splitlines()[0]) from exc
    return dict(parser[_SECTION])


def read_env(environ: Mapping[str, str] | None = None) -> dict[str, str]:
    environ = os.environ if environ is None else environ
    out = {}
    for key, value in environ.items():
        if key.startswith(ENV_PREFIX):
            out[key[len(ENV_PREFIX):].lower()] = value
    return out


def _parse(raw: Mapping[str, str]) -> dict[str, object]:
    parsed = {}
    for key, text in raw.items():
        if key not in PARSERS:
            raise ConfigError(key, "unknown key")
        try:
            parsed[key] = PARSERS[key](text)
        except ValueError as exc:
            raise ConfigError(key, f"cannot parse {text!r} ({exc})") from exc
    return parsed


_SAMPLER_KEYS = ("rng_seed", "q_values", "charge_range", "modulus_band", "pole_margin",
                 "balance", "max_rejections")
_POLICY_KEYS = ("max_terms", "target_tail")
_PLAIN_KEYS = ("grid_points", "m_max", "instances", "identity_tolerance", "kernel_tolerance",
               "lemma_tolerance", "safety_factor")


def build(base: RunConfig, values: Mapping[str, object], sources=()) -> RunConfig:
    """Apply parsed overrides to ``base``, validating field by field."""
    sampler_kw = {k: values[k] for k in _SAMPLER_KEYS if k in values}
    for key in sampler_kw:
        try:
            replace(base.sampler, **{key: sampler_kw[key]})
        except (ValueError, TypeError) as exc:
            raise ConfigError(key, str(exc)) from exc
    sampler = replace(base.sampler, **sampler_kw)

    policy_kw = {k: values[k] for k in _POLICY_KEYS if k in values}
    try:
        policy = replace(base.policy, **policy_kw)
    except ValueError as exc:
        raise ConfigError(next(iter(policy_kw)), str(exc)) from exc

    plain = {k: values[k] for k in _PLAIN_KEYS if k in values}
    for key in ("grid_points", "instances"):
        if key in plain and plain[key] < 1:
            raise ConfigError(key, "must be >= 1")
    if "m_max" in plain and plain["m_max"] < 0:
        raise ConfigError("m_max", "must be >= 0")
    for key in ("identity_tolerance", "kernel_tolerance", "lemma_tolerance", "safety_factor"):
        if key in plain and not plain[key] > 0:
            raise ConfigError(key, "must be > 0")

    charges = base.bailey_charges
    given = [k for k in ("n_t", "n_s", "n_u") if k in values]
    if given:
        if len(given) != 3:
            missing = sorted({"n_t", "n_s", "n_u"} - set(given))
            raise ConfigError(missing[0], "n_t, n_s and n_u must be given together")
        charges = (values["n_t"], values["n_s"], values["n_u"])
        if sum(charges) != 0:
            raise ConfigError("n_u", f"n_u + n_s + n_t = {sum(charges)}, must be 0")
    return replace(base, sampler=sampler, policy=policy, bailey_charges=charges,
                   sources=tuple(sources), **plain)


def load(path: str | os.PathLike | None, base: RunConfig = VERIFY_DEFAULTS,
         environ: Mapping[str, str] | None = None, overrides: Mapping[str, object] | None = None
         ) -> RunConfig:
    """Resolve defaults, environment, file and explicit overrides in that order."""
    merged: dict[str, object] = {}
    sources = ["defaults"]
    env = read_env(environ)
    if env:
        merged.update(_parse(env))
        sources.append("env")
    if path is not None:
        try:
            merged.update(_parse(read_file(path)))
        except OSError as exc:
            raise ConfigError("<path>", f"cannot read {path}: {exc.strerror}") from exc
        sources.append(str(path))
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})
        sources.append("flags")
    return build(base, merged, sources)

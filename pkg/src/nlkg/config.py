"""Flat ``key = value`` run configuration."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import exponents
from .evolve import EvolveConfig
from .spectral import DomainSpec, validity_horizon

log = logging.getLogger(__name__)

KEYS = (
    "d", "k", "p", "sign", "box_lengths", "torus_lengths", "nx", "ny", "dt", "T",
    "snapshot_stride", "data_kind", "data_amplitude", "data_radius", "data_file",
    "seed", "output_dir", "tol", "max_iter", "unsafe_horizon",
)
REQUIRED = ("d", "k", "p", "box_lengths", "torus_lengths", "nx", "ny", "dt", "T")
DEFAULTS = {
    "sign": "-1", "snapshot_stride": "1", "data_kind": "bump", "data_amplitude": "0.01",
    "data_radius": "1.0", "data_file": "", "seed": "0", "output_dir": "run", "tol": "1e-10",
    "max_iter": "50", "unsafe_horizon": "false",
}
# gaussian data is not compactly supported; exp(-16) ~ 1e-7 at four radii
GAUSSIAN_SUPPORT_FACTOR = 4.0


class ConfigError(ValueError):
    pass


class HorizonError(ConfigError):
    pass


def _int(key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def _float(key, text):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite, got {text!r}")
    return value


def _list(key, text, conv):
    parts = [t for t in (s.strip() for s in text.split(",")) if t]
    if not parts:
        raise ConfigError(f"{key}: empty list")
    return tuple(conv(key, t) for t in parts)


def _bool(key, text):
    low = text.strip().lower()
    if low in {"1", "true", "yes", "on"}:
        return True
    if low in {"0", "false", "no", "off"}:
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


@dataclass
class RunConfig:
    d: int
    k: int
    p: Fraction
    sign: int
    box_lengths: tuple[float, ...]
    torus_lengths: tuple[float, ...]
    nx: tuple[int, ...]
    ny: tuple[int, ...]
    dt: float
    T: float
    snapshot_stride: int
    data_kind: str
    data_amplitude: float
    data_radius: float
    data_file: str
    seed: int
    output_dir: str
    tol: float
    max_iter: int
    unsafe_horizon: bool
    verdicts: exponents.Applicability | None = field(default=None, repr=False)
    warnings: list[str] = field(default_factory=list)

    @property
    def domain(self) -> DomainSpec:
        return DomainSpec(self.d, self.k, self.box_lengths, self.torus_lengths, self.nx, self.ny)

    @property
    def evolve_config(self) -> EvolveConfig:
        return EvolveConfig(p=float(self.p), sign=self.sign, dt=self.dt, T=self.T, snapshot_stride=self.snapshot_stride)

    @property
    def support_radius(self) -> float:
        if self.data_kind == "gaussian":
            return GAUSSIAN_SUPPORT_FACTOR * self.data_radius
        return self.data_radius

    def horizon(self) -> float:
        return validity_horizon(self.domain, self.support_radius)

    def echo(self) -> dict:
        out = {key: getattr(self, key) for key in KEYS}
        out["p"] = str(self.p)
        for key in ("box_lengths", "torus_lengths", "nx", "ny"):
            out[key] = list(out[key])
        return out


def read_pairs(path) -> dict[str, str]:
    pairs = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        pairs[key] = value
    return pairs


def build_config(pairs: dict[str, str]) -> RunConfig:
    unknown = sorted(set(pairs) - set(KEYS))
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
    missing = [key for key in REQUIRED if key not in pairs]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    raw = {**DEFAULTS, **pairs}
    try:
        p = exponents.as_rational(raw["p"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"p: {exc}") from None
    cfg = RunConfig(
        d=_int("d", raw["d"]), k=_int("k", raw["k"]), p=p, sign=_int("sign", raw["sign"]),
        box_lengths=_list("box_lengths", raw["box_lengths"], _float),
        torus_lengths=_list("torus_lengths", raw["torus_lengths"], _float),
        nx=_list("nx", raw["nx"], _int), ny=_list("ny", raw["ny"], _int),
        dt=_float("dt", raw["dt"]), T=_float("T", raw["T"]),
        snapshot_stride=_int("snapshot_stride", raw["snapshot_stride"]),
        data_kind=raw["data_kind"].strip(), data_amplitude=_float("data_amplitude", raw["data_amplitude"]),
        data_radius=_float("data_radius", raw["data_radius"]), data_file=raw["data_file"].strip(),
        seed=_int("seed", raw["seed"]), output_dir=raw["output_dir"].strip(),
        tol=_float("tol", raw["tol"]), max_iter=_int("max_iter", raw["max_iter"]),
        unsafe_horizon=_bool("unsafe_horizon", raw["unsafe_horizon"]),
    )
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    if cfg.data_kind not in {"gaussian", "bump", "file"}:
        raise ConfigError(f"data_kind: expected gaussian, bump or file, got {cfg.data_kind!r}")
    if cfg.data_kind == "file" and not cfg.data_file:
        raise ConfigError("data_file: required when data_kind = file")
    if cfg.data_radius <= 0:
        raise ConfigError("data_radius: must be positive")
    if cfg.tol <= 0 or cfg.max_iter < 1:
        raise ConfigError("tol must be positive and max_iter >= 1")
    try:
        cfg.domain
        cfg.evolve_config.n_steps
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    cfg.verdicts = exponents.theorem_applicability(cfg.d, cfg.k, cfg.p)
    if not cfg.verdicts.thm1.applicable:
        cfg.warnings.append(
            "outside the H^1 small-data theorem: " + ", ".join(cfg.verdicts.thm1.failed_conditions)
        )
    if cfg.d * cfg.p > 4:
        prof = exponents.derived_profile(cfg.d, cfg.k, cfg.p)
        if prof.gamma >= 0:
            route = exponents.embedding_compact(cfg.k, prof.gamma, cfg.p, finite_volume=True)
            if route.route is exponents.Route.MORREY:
                cfg.warnings.append(
                    f"gamma(p) = {prof.gamma} > k/2: the y-embedding goes through L^inf and the finite torus volume"
                )
    for message in cfg.warnings:
        log.warning(message)

    horizon = cfg.horizon()
    if cfg.T > horizon and not cfg.unsafe_horizon:
        raise HorizonError(
            f"T={cfg.T} exceeds the finite-speed horizon {horizon:.6g} for support radius "
            f"{cfg.support_radius:g}; set unsafe_horizon = true to override"
        )


def parse_config(path, overrides: dict[str, str] | None = None) -> RunConfig:
    try:
        pairs = read_pairs(path) if path else {}
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    pairs.update(overrides or {})
    return build_config(pairs)

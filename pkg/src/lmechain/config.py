"""Scenario files: ``key = value`` lines, ``#`` comments, optional ``[section]`` blocks.

Keys before the first section header describe the chain. Recognised
sections are ``[sweep]``, ``[fock]`` and ``[collision]``::

    n_sites = 2
    omega_first = 0.4
    omega_last = 1.0
    epsilon = 0.1
    eta = 0
    gamma = 0.5
    t_cold = 0.5
    t_hot = 1.0

    [sweep]
    parameter = omega_first_ratio
    range = 0.01, 2.0
    steps = 200
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ChainError, DomainError
from .model import ChainSpec, linear_profile

ROOT = "scenario"
CHAIN_KEYS = {"n_sites", "omega_first", "omega_last", "frequencies", "epsilon", "eta", "gamma", "t_cold", "t_hot"}
SECTION_KEYS = {
    "sweep": {"parameter", "range", "steps"},
    "fock": {"dim", "budget"},
    "collision": {"g", "taus", "strokes", "dim"},
}
SWEEP_PARAMETERS = ("omega_first_ratio",)


class ConfigError(ChainError, ValueError):
    """Malformed or inconsistent scenario file; ``key`` names the culprit."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class SweepConfig:
    parameter: str
    lo: float
    hi: float
    steps: int

    def ratios(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass(frozen=True)
class FockConfig:
    dim: int
    budget: int = 4096


@dataclass(frozen=True)
class CollisionConfig:
    g: Optional[float]
    taus: tuple[float, ...]
    strokes: int = 1
    dim: Optional[int] = None


@dataclass(frozen=True)
class ScenarioConfig:
    spec: ChainSpec
    linear: bool
    sweep: Optional[SweepConfig] = None
    fock: Optional[FockConfig] = None
    collision: Optional[CollisionConfig] = None

    @property
    def omega_last(self) -> float:
        return self.spec.frequencies[-1]

    def spec_at_ratio(self, ratio: float) -> ChainSpec:
        """Chain with ``omega_1 = ratio * omega_N``; linear profiles are recomputed."""
        w_last = self.omega_last
        if self.linear:
            freqs = linear_profile(ratio * w_last, w_last, self.spec.n_sites)
        else:
            freqs = (ratio * w_last,) + self.spec.frequencies[1:]
        return self.spec.with_(frequencies=tuple(freqs))


def _number(section: str, key: str, raw: str, kind=float):
    name = key if section == ROOT else f"{section}.{key}"
    try:
        value = kind(raw)
    except ValueError:
        raise ConfigError(name, f"expected {kind.__name__}, got {raw!r}") from None
    if kind is float and not np.isfinite(value):
        raise ConfigError(name, "must be finite")
    return value


def _numbers(section: str, key: str, raw: str) -> tuple[float, ...]:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    return tuple(_number(section, key, p) for p in parts)


def parse_config(text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser(
        inline_comment_prefixes=("#",), comment_prefixes=("#",), interpolation=None, strict=True)
    try:
        parser.read_string(f"[{ROOT}]\n" + text)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(exc.option, "given twice") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(exc.section, "section given twice") from None
    except configparser.Error as exc:
        raise ConfigError("<syntax>", str(exc).splitlines()[0]) from None

    for section in parser.sections():
        allowed = CHAIN_KEYS if section == ROOT else SECTION_KEYS.get(section)
        if allowed is None:
            raise ConfigError(section, "unknown section")
        for key in parser[section]:
            if key not in allowed:
                raise ConfigError(key if section == ROOT else f"{section}.{key}", "unknown key")

    root = parser[ROOT]
    for key in ("n_sites", "epsilon", "gamma", "t_cold", "t_hot"):
        if key not in root:
            raise ConfigError(key, "missing")
    n_sites = _number(ROOT, "n_sites", root["n_sites"], int)
    if "frequencies" in root:
        if "omega_first" in root or "omega_last" in root:
            raise ConfigError("frequencies", "give either frequencies or omega_first/omega_last")
        freqs = _numbers(ROOT, "frequencies", root["frequencies"])
        linear = False
    else:
        for key in ("omega_first", "omega_last"):
            if key not in root:
                raise ConfigError(key, "missing")
        w1 = _number(ROOT, "omega_first", root["omega_first"])
        wn = _number(ROOT, "omega_last", root["omega_last"])
        try:
            freqs = tuple(linear_profile(w1, wn, n_sites))
        except DomainError as exc:
            raise ConfigError("n_sites", str(exc)) from None
        linear = True
    values = {k: _number(ROOT, k, root[k]) for k in ("epsilon", "gamma", "t_cold", "t_hot")}
    values["eta"] = _number(ROOT, "eta", root["eta"]) if "eta" in root else 0.0
    try:
        spec = ChainSpec(n_sites=n_sites, frequencies=freqs, **values)
    except DomainError as exc:
        raise ConfigError(_culprit(str(exc)), str(exc)) from None

    sweep = fock = collision = None
    if parser.has_section("sweep"):
        sec = parser["sweep"]
        parameter = sec.get("parameter", "omega_first_ratio")
        if parameter not in SWEEP_PARAMETERS:
            raise ConfigError("sweep.parameter", f"unsupported parameter {parameter!r}")
        if "range" not in sec or "steps" not in sec:
            raise ConfigError("sweep.range" if "range" not in sec else "sweep.steps", "missing")
        bounds = _numbers("sweep", "range", sec["range"])
        if len(bounds) != 2 or not 0 < bounds[0] < bounds[1]:
            raise ConfigError("sweep.range", "need two positive increasing values lo, hi")
        steps = _number("sweep", "steps", sec["steps"], int)
        if steps < 2:
            raise ConfigError("sweep.steps", "need at least 2 steps")
        sweep = SweepConfig(parameter, bounds[0], bounds[1], steps)
    if parser.has_section("fock"):
        sec = parser["fock"]
        if "dim" not in sec:
            raise ConfigError("fock.dim", "missing")
        dim = _number("fock", "dim", sec["dim"], int)
        if dim < 2:
            raise ConfigError("fock.dim", "need at least 2 levels")
        budget = _number("fock", "budget", sec["budget"], int) if "budget" in sec else 4096
        fock = FockConfig(dim, budget)
    if parser.has_section("collision"):
        sec = parser["collision"]
        g = _number("collision", "g", sec["g"]) if "g" in sec else None
        if g is not None and g < 0:
            raise ConfigError("collision.g", "must be nonnegative")
        if "taus" not in sec:
            raise ConfigError("collision.taus", "missing")
        taus = _numbers("collision", "taus", sec["taus"])
        if any(t <= 0 for t in taus):
            raise ConfigError("collision.taus", "interaction times must be positive")
        strokes = _number("collision", "strokes", sec["strokes"], int) if "strokes" in sec else 1
        if strokes < 1:
            raise ConfigError("collision.strokes", "need at least one stroke")
        dim = _number("collision", "dim", sec["dim"], int) if "dim" in sec else None
        collision = CollisionConfig(g, taus, strokes, dim)
    return ScenarioConfig(spec, linear, sweep, fock, collision)


def _culprit(message: str) -> str:
    for key in ("gamma", "t_cold", "t_hot", "epsilon", "n_sites", "frequencies", "omega"):
        if key in message:
            return "frequencies" if key == "omega" else key
    return "<chain>"


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)

"""Experiment configuration: flat key = value sections, canonical text, hash.

Configs are INI-style with two sections, ``[scenario]`` and ``[solver]``
(plus an optional ``[output]``).  Every effective parameter, default or not,
appears in the canonical serialization (sections and keys sorted), whose
SHA-256 prefix is the config hash stamped into every artifact.  Parsing a
canonical serialization reproduces it byte for byte.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, fields

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "parse_config_text"]

_POTENTIAL_PRESETS = ("default", "rotated")
_NONLINEARITY_PRESETS = ("power", "power-regularized", "zero")


class ConfigError(ValueError):
    """Unparseable or out-of-range configuration; carries field diagnostics."""


@dataclass(frozen=True)
class ExperimentConfig:
    # [scenario]
    preset: str = "default"
    alpha: float = 0.75
    j_min: float = -0.25
    j_max: float = 0.75
    i_min: float = 0.0
    i_max: float = 0.5
    k: float = 0.9
    envelope_steepness: float = 0.0025
    wall_height: float = 30.0
    wall_steepness: float = 5e-7
    nonlinearity: str = "power"
    p: float = 1.5
    nu: float = 1.5
    delta: float = 1.0
    xi_scale: float = 1.0
    xi_width: float = 10.0
    eps: float = 1e-6
    lam: float = 0.0  # 0 means "10x the computed threshold"
    lambdas: tuple[float, ...] = ()
    grid_n: int = 4096
    domain: float = 32.0
    sobolev_trials: int = 200
    # [solver]
    max_iters: int = 5000
    grad_tol: float = 1e-8
    armijo: float = 1e-4
    shrink: float = 0.5
    memory: int = 10
    seed: int = 0
    newton_switch_tol: float = 1e-5
    max_cg: int = 250
    warm_start: bool = True
    parallel: bool = False
    # [output]
    out_dir: str = "runs"

    def canonical_text(self) -> str:
        """Every effective numerical parameter, sections and keys sorted.

        The output location is excluded: the hash identifies the experiment,
        not where its artifacts land.
        """
        sections = {"scenario": {}, "solver": {}}
        for f in fields(self):
            section = _SECTION_OF[f.name]
            if section == "output":
                continue
            key = "lambda" if f.name == "lam" else f.name
            sections[section][key] = _render(getattr(self, f.name))
        out = io.StringIO()
        for section in sorted(sections):
            out.write(f"[{section}]\n")
            for key in sorted(sections[section]):
                out.write(f"{key} = {sections[section][key]}\n")
        return out.getvalue()

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()[:16]


_SECTION_OF = {
    "preset": "scenario", "alpha": "scenario", "j_min": "scenario", "j_max": "scenario",
    "i_min": "scenario", "i_max": "scenario", "k": "scenario",
    "envelope_steepness": "scenario", "wall_height": "scenario",
    "wall_steepness": "scenario", "nonlinearity": "scenario", "p": "scenario",
    "nu": "scenario", "delta": "scenario", "xi_scale": "scenario",
    "xi_width": "scenario", "eps": "scenario", "lam": "scenario",
    "lambdas": "scenario", "grid_n": "scenario", "domain": "scenario",
    "sobolev_trials": "scenario",
    "max_iters": "solver", "grad_tol": "solver", "armijo": "solver",
    "shrink": "solver", "memory": "solver", "seed": "solver",
    "newton_switch_tol": "solver", "max_cg": "solver", "warm_start": "solver",
    "parallel": "solver",
    "out_dir": "output",
}


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, tuple):
        return ",".join(format(v, ".17g") for v in value)
    return str(value)


def _parse_value(name: str, raw: str):
    raw = raw.strip()
    kind = ExperimentConfig.__dataclass_fields__[name].type
    try:
        if name == "lambdas":
            if raw == "":
                return ()
            return tuple(float(x) for x in raw.split(","))
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError("expected a boolean")
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"field '{name}': cannot parse {raw!r} ({exc})") from exc


def _validate(cfg: ExperimentConfig) -> ExperimentConfig:
    def fail(msg):
        raise ConfigError(msg)

    if cfg.preset not in _POTENTIAL_PRESETS:
        fail(f"field 'preset': unknown preset {cfg.preset!r}, choose from {_POTENTIAL_PRESETS}")
    if cfg.nonlinearity not in _NONLINEARITY_PRESETS:
        fail(
            f"field 'nonlinearity': unknown preset {cfg.nonlinearity!r}, "
            f"choose from {_NONLINEARITY_PRESETS}"
        )
    if not (0.0 < cfg.alpha < 1.0):
        fail(f"field 'alpha': must lie in (0, 1), got {cfg.alpha}")
    if not (cfg.j_min < cfg.j_max):
        fail("fields 'j_min'/'j_max': the well must be a nonempty interval")
    if not (cfg.j_min <= cfg.i_min < cfg.i_max <= cfg.j_max):
        fail("fields 'i_min'/'i_max': the core must be contained in the well")
    if cfg.k <= 0:
        fail(f"field 'k': must be positive, got {cfg.k}")
    for name in ("envelope_steepness", "wall_height", "wall_steepness", "domain",
                 "delta", "xi_scale", "xi_width"):
        if getattr(cfg, name) <= 0:
            fail(f"field '{name}': must be positive, got {getattr(cfg, name)}")
    if not (1.0 < cfg.p < 2.0):
        fail(f"field 'p': must lie in (1, 2), got {cfg.p}")
    if not (cfg.p <= cfg.nu < 2.0):
        fail(f"field 'nu': must lie in [p, 2), got {cfg.nu}")
    if cfg.eps < 0:
        fail(f"field 'eps': must be nonnegative, got {cfg.eps}")
    n = cfg.grid_n
    if n < 8 or (n & (n - 1)) != 0:
        fail(f"field 'grid_n': must be a power of two >= 8, got {n}")
    if cfg.lam < 0:
        fail(f"field 'lambda': must be positive (or 0 for the default), got {cfg.lam}")
    if any(x <= 0 for x in cfg.lambdas):
        fail("field 'lambdas': all weights must be positive")
    if any(b < a for a, b in zip(cfg.lambdas, cfg.lambdas[1:])):
        fail("field 'lambdas': weights must be ascending")
    for name in ("max_iters", "memory", "max_cg", "sobolev_trials"):
        if getattr(cfg, name) <= 0:
            fail(f"field '{name}': must be positive, got {getattr(cfg, name)}")
    for name in ("grad_tol", "newton_switch_tol"):
        if getattr(cfg, name) <= 0:
            fail(f"field '{name}': must be positive, got {getattr(cfg, name)}")
    if not (0 < cfg.armijo < 1 and 0 < cfg.shrink < 1):
        fail("fields 'armijo'/'shrink': must lie in (0, 1)")
    return cfg


def parse_config_text(text: str, overrides: dict[str, object] | None = None) -> ExperimentConfig:
    """Parse INI text into a validated config; ``preset`` is required.

    ``overrides`` maps field names to already-typed values (CLI flags) and is
    applied before validation.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    known_by_section = {"scenario": set(), "solver": set(), "output": set()}
    for name, section in _SECTION_OF.items():
        known_by_section[section].add("lambda" if name == "lam" else name)
    values = {}
    for section in parser.sections():
        if section not in known_by_section:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in known_by_section[section]:
                raise ConfigError(f"unknown field '{key}' in section [{section}]")
            name = "lam" if key == "lambda" else key
            values[name] = _parse_value(name, raw)
    if "scenario" not in parser.sections() or not parser.has_option("scenario", "preset"):
        raise ConfigError("missing required field 'preset' in section [scenario]")
    if overrides:
        values.update(overrides)
    return _validate(ExperimentConfig(**values))


def parse_config(path: str, overrides: dict[str, object] | None = None) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), overrides)

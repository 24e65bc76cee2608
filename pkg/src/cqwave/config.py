"""Experiment configuration: INI-style ``key = value`` text with sections.

Sections and keys::

    [run]         experiment, method, levels, T, output_dir, base_rings,
                  radius, snapshot_times, max_energy_ratio
    [quadrature]  any field of QuadratureOptions
    [lshape]      level, T, t_focus, pulse_a, variable_speed, n_sources,
                  source_radius
    [ttr]         J, n_samples
    [stability]   n_points
    [selftest]    N

Unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
import dataclasses
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .bem import QuadratureOptions

__all__ = ["Experiment", "ExperimentConfig", "ConfigError", "parse_config", "load_config", "dump_config"]


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps it to exit code 2."""


class Experiment(str, enum.Enum):
    CONVERGENCE_DISK = "convergence-disk"
    LSHAPE_FOCUS = "lshape"
    CQ_SELFTEST = "cq-selftest"
    DESIGN_TTR = "design-ttr"
    STABILITY_REGION = "stability-region"


METHODS = ("bdf2", "tr", "ttr")


@dataclass
class ExperimentConfig:
    experiment: Experiment = Experiment.CONVERGENCE_DISK
    method: str = "bdf2"
    levels: list = field(default_factory=lambda: [1, 2, 3, 4])
    T: float = 2.0
    output_dir: str = "out"
    base_rings: int = 4
    radius: float = 3.0
    snapshot_times: list = field(default_factory=list)
    max_energy_ratio: Optional[float] = None
    quadrature: dict = field(default_factory=dict)
    lshape_level: int = 3
    lshape_T: float = 6.0
    t_focus: float = 3.5
    pulse_a: float = 20.0
    variable_speed: bool = True
    n_sources: int = 9
    source_radius: float = 2.5
    ttr_J: int = 4
    ttr_samples: int = 50000
    stability_points: int = 720
    selftest_N: int = 128

    def validate(self) -> "ExperimentConfig":
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.levels or any((not isinstance(l, int)) or l < 0 for l in self.levels):
            raise ConfigError("levels must be a non-empty list of non-negative integers")
        if not self.T >= 0:
            raise ConfigError("T must be non-negative")
        if self.base_rings < 1 or not self.radius > 0:
            raise ConfigError("base_rings >= 1 and radius > 0 required")
        if self.max_energy_ratio is not None and not self.max_energy_ratio > 1:
            raise ConfigError("max_energy_ratio must exceed 1")
        names = {f.name for f in dataclasses.fields(QuadratureOptions)}
        bad = set(self.quadrature) - names
        if bad:
            raise ConfigError(f"unknown quadrature keys: {sorted(bad)}")
        if self.ttr_J < 2 or self.ttr_samples < 10 or self.stability_points < 8 or self.selftest_N < 8:
            raise ConfigError("ttr J >= 2, n_samples >= 10, n_points >= 8, N >= 8 required")
        if self.n_sources < 1 or self.lshape_level < 0 or not self.lshape_T > 0:
            raise ConfigError("n_sources >= 1, level >= 0 and T > 0 required in [lshape]")
        return self

    def quadrature_options(self) -> Optional[QuadratureOptions]:
        if not self.quadrature:
            return None
        return QuadratureOptions(**self.quadrature)


def _floats(text):
    return [float(x) for x in text.replace(",", " ").split()]


def _ints(text):
    return [int(x) for x in text.replace(",", " ").split()]


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text):
    return None if text.strip().lower() in ("", "none") else float(text)


# section -> key -> (attribute, parser)
_SCHEMA = {
    "run": {
        "experiment": ("experiment", Experiment),
        "method": ("method", str.strip),
        "levels": ("levels", _ints),
        "T": ("T", float),
        "output_dir": ("output_dir", str.strip),
        "base_rings": ("base_rings", int),
        "radius": ("radius", float),
        "snapshot_times": ("snapshot_times", _floats),
        "max_energy_ratio": ("max_energy_ratio", _opt_float),
    },
    "lshape": {
        "level": ("lshape_level", int),
        "T": ("lshape_T", float),
        "t_focus": ("t_focus", float),
        "pulse_a": ("pulse_a", float),
        "variable_speed": ("variable_speed", _bool),
        "n_sources": ("n_sources", int),
        "source_radius": ("source_radius", float),
    },
    "ttr": {"J": ("ttr_J", int), "n_samples": ("ttr_samples", int)},
    "stability": {"n_points": ("stability_points", int)},
    "selftest": {"N": ("selftest_N", int)},
}


def _quadrature_parser(name):
    fields = {f.name: f for f in dataclasses.fields(QuadratureOptions)}
    if name not in fields:
        raise ConfigError(f"unknown key {name!r} in section [quadrature]")
    return int if isinstance(fields[name].default, int) else float


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse configuration text.

    Raises
    ------
    ConfigError
        On syntax errors, unknown sections or keys, or invalid values.
    """
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str  # keys are case-sensitive
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    cfg = ExperimentConfig()
    for section in cp.sections():
        if section == "quadrature":
            for key, raw in cp.items(section):
                conv = _quadrature_parser(key)
                try:
                    cfg.quadrature[key] = conv(raw)
                except ValueError as exc:
                    raise ConfigError(f"{source}: [{section}] {key}: {exc}") from None
            continue
        schema = _SCHEMA.get(section)
        if schema is None:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in schema:
                raise ConfigError(f"{source}: unknown key {key!r} in section [{section}]")
            attr, conv = schema[key]
            try:
                setattr(cfg, attr, conv(raw))
            except ValueError as exc:
                raise ConfigError(f"{source}: [{section}] {key}: {exc}") from None
    return cfg.validate()


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, str(path))


def _fmt(value):
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ", ".join(_fmt(v) for v in value)
    if value is None:
        return "none"
    return str(value)


def dump_config(cfg: ExperimentConfig) -> str:
    """Serialize to text that :func:`parse_config` maps back to an equal config."""
    lines = []
    for section, schema in _SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (attr, _) in schema.items():
            lines.append(f"{key} = {_fmt(getattr(cfg, attr))}")
        lines.append("")
    if cfg.quadrature:
        lines.append("[quadrature]")
        for key, value in sorted(cfg.quadrature.items()):
            lines.append(f"{key} = {_fmt(value)}")
        lines.append("")
    return "\n".join(lines)

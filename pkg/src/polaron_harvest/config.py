"""Run configuration: ``key = value unit`` files with ``[section]`` headers.

Example::

    [species]
    rho0 = 5e14 cm^-3
    [protocol]
    T = 0.065 ms
    Omega = 35 krad/s
    [command]
    name = response

Every physical quantity needs a unit from :data:`UNITS`.  Frequencies are
angular (``rad/s`` or ``krad/s``); ``Hz`` style units are refused because they
leave a factor of ``2 pi`` open.  Missing keys fall back to the K-39 in Rb-87
defaults of :class:`polaron_harvest.params.Experiment`.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .params import (A0, AMU, K39, CondensateSpec, Experiment, PairGeometry, ParameterError,
                     derive_condensate, reduced_mass, coupling_ab)


class ConfigError(ValueError):
    """Malformed or unknown configuration entry."""


class UnitError(ConfigError):
    """Missing, unknown or dimensionally wrong unit."""


LENGTH, TIME, MASS, DENSITY, ANGULAR = "length", "time", "mass", "density", "angular frequency"

UNITS = {
    "m": (LENGTH, 1.0), "cm": (LENGTH, 1e-2), "um": (LENGTH, 1e-6), "nm": (LENGTH, 1e-9),
    "a0": (LENGTH, A0),
    "s": (TIME, 1.0), "ms": (TIME, 1e-3), "us": (TIME, 1e-6),
    "kg": (MASS, 1.0), "u": (MASS, AMU),
    "m^-3": (DENSITY, 1.0), "cm^-3": (DENSITY, 1e6),
    "rad/s": (ANGULAR, 1.0), "krad/s": (ANGULAR, 1e3),
}
SI_UNIT = {LENGTH: "m", TIME: "s", MASS: "kg", DENSITY: "m^-3", ANGULAR: "rad/s"}
_AMBIGUOUS = {"hz", "khz", "mhz", "2pi*hz", "2pi*khz", "2pikhz", "2pi.khz", "rev/s"}

VARIABLE_DIMENSION = {"Omega": ANGULAR, "T": TIME, "L": LENGTH, "a_ab": LENGTH}

_PRESET_T = Experiment()


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run description in SI units."""

    # species
    m_b: float = _PRESET_T.condensate.m_b
    a_bb: float = _PRESET_T.condensate.a_bb
    rho0: float = _PRESET_T.condensate.rho0
    m_a: float = _PRESET_T.m_a
    a_aa: float = K39.a_aa
    # protocol
    T: float = _PRESET_T.T_switch
    a_ab: float = _PRESET_T.a_ab
    Omega: float = _PRESET_T.omega_trap
    switching: str = "gaussian"
    profile: str = ""
    # geometry; ratio wins when both are set
    L: float | None = None
    ratio: float | None = 5.25
    # command
    command: str = "derive"
    preset: str = ""
    variable: str = "Omega"
    start: float | None = None
    stop: float | None = None
    points: int = 61
    spacing: str = "log"
    # tolerances
    quad_rel_tol: float = 1e-10
    oracle_rel_tol: float = 1e-8
    k_cut_factor: float = 1.0
    healing_limit_Mm: float = 0.07
    healing_limit_local: float = 0.01
    finite_volume_tol: float = 0.01
    box_widths: float = 50.0

    def experiment(self) -> Experiment:
        if self.ratio is not None:
            geom = PairGeometry(constraint_ratio=self.ratio)
        else:
            geom = PairGeometry(separation_L=self.L)
        return Experiment(condensate=CondensateSpec(m_b=self.m_b, a_bb=self.a_bb, rho0=self.rho0),
                          m_a=self.m_a, omega_trap=self.Omega, a_ab=self.a_ab, T_switch=self.T,
                          geometry=geom)

    def grid(self) -> tuple:
        if self.start is None or self.stop is None:
            raise ConfigError("[command] needs start and stop for a custom sweep")
        if self.spacing == "log":
            g = np.geomspace(self.start, self.stop, self.points)
        else:
            g = np.linspace(self.start, self.stop, self.points)
        return tuple(float(x) for x in g)

    def with_updates(self, **changes) -> "RunConfig":
        return replace(self, **changes)


# key -> (section, kind) where kind is a dimension, "float", "int", "str" or "choice:a|b"
_SCHEMA = {
    "m_b": ("species", MASS), "a_bb": ("species", LENGTH), "rho0": ("species", DENSITY),
    "m_a": ("species", MASS), "a_aa": ("species", LENGTH),
    "T": ("protocol", TIME), "a_ab": ("protocol", LENGTH), "Omega": ("protocol", ANGULAR),
    "switching": ("protocol", "choice:gaussian|tabulated"), "profile": ("protocol", "str"),
    "L": ("geometry", LENGTH), "ratio": ("geometry", "float"),
    "command": ("command", "choice:derive|response|sweep|validate"),
    "preset": ("command", "choice:|fig2|fig3|fig4"),
    "variable": ("command", "choice:Omega|T|L|a_ab"),
    "start": ("command", "variable"), "stop": ("command", "variable"),
    "points": ("command", "int"), "spacing": ("command", "choice:log|linear"),
    "quad_rel_tol": ("tolerances", "float"), "oracle_rel_tol": ("tolerances", "float"),
    "k_cut_factor": ("tolerances", "float"), "healing_limit_Mm": ("tolerances", "float"),
    "healing_limit_local": ("tolerances", "float"), "finite_volume_tol": ("tolerances", "float"),
    "box_widths": ("tolerances", "float"),
}
# the subcommand is spelled "name" inside [command]
_ALIASES = {("command", "name"): "command"}
SECTIONS = ("species", "protocol", "geometry", "command", "tolerances")


def parse_quantity(key: str, text: str, dimension: str) -> float:
    """``"5e14 cm^-3"`` -> ``5e20`` for a density key, with unit checks."""
    parts = text.split()
    if not parts:
        raise ConfigError(f"{key}: empty value")
    try:
        number = float(parts[0])
    except ValueError:
        raise ConfigError(f"{key}: {parts[0]!r} is not a number") from None
    if len(parts) == 1:
        raise UnitError(f"{key}: missing unit (expected a {dimension} unit, e.g. {SI_UNIT[dimension]})")
    unit = "".join(parts[1:])
    if unit.lower() in _AMBIGUOUS or unit.lower().endswith("hz"):
        raise UnitError(f"{key}: {unit!r} is ambiguous; give angular frequencies in rad/s or krad/s")
    if unit not in UNITS:
        raise UnitError(f"{key}: unknown unit {unit!r}")
    dim, factor = UNITS[unit]
    if dim != dimension:
        raise UnitError(f"{key}: unit {unit!r} is a {dim}, expected a {dimension}")
    if not math.isfinite(number):
        raise ConfigError(f"{key}: value must be finite")
    return number * factor


def _parse_scalar(key: str, text: str, kind: str):
    if kind == "str":
        return text.strip()
    if kind.startswith("choice:"):
        options = kind[len("choice:"):].split("|")
        value = text.strip()
        if value not in options:
            raise ConfigError(f"{key}: {value!r} is not one of {[o for o in options if o]}")
        return value
    parts = text.split()
    if len(parts) != 1:
        raise UnitError(f"{key}: dimensionless value takes no unit, got {text!r}")
    try:
        return int(parts[0]) if kind == "int" else float(parts[0])
    except ValueError:
        raise ConfigError(f"{key}: {parts[0]!r} is not a valid {kind}") from None


def parse_config(text: str) -> RunConfig:
    """Parse a configuration document into a :class:`RunConfig`.

    Raises
    ------
    UnitError
        A quantity without unit, with an unknown unit, or with the wrong dimension.
    ConfigError
        Unknown section or key, unparsable value.
    ParameterError
        A value outside its physical range.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                   default_section="__defaults__")
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    raw = {}
    for section in cp.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        for key, value in cp.items(section):
            name = _ALIASES.get((section, key), key)
            if name not in _SCHEMA or _SCHEMA[name][0] != section:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            raw[name] = value
    values = {}
    variable = raw.get("variable", RunConfig.variable).strip()
    for name, text in raw.items():
        kind = _SCHEMA[name][1]
        if kind == "variable":
            if variable not in VARIABLE_DIMENSION:
                raise ConfigError(f"variable: unknown scan variable {variable!r}")
            values[name] = parse_quantity(name, text, VARIABLE_DIMENSION[variable])
        elif kind in SI_UNIT:
            values[name] = parse_quantity(name, text, kind)
        else:
            values[name] = _parse_scalar(name, text, kind)
    if "L" in raw and "ratio" not in raw:
        values["ratio"] = None
    cfg = RunConfig(**values)
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    for name in ("m_b", "a_bb", "rho0", "m_a", "T", "Omega", "quad_rel_tol", "oracle_rel_tol",
                 "k_cut_factor", "box_widths"):
        if not getattr(cfg, name) > 0:
            raise ParameterError(f"{name} must be positive, got {getattr(cfg, name)!r}")
    if cfg.ratio is None and cfg.L is None:
        raise ParameterError("[geometry] needs L or ratio")
    if cfg.ratio is not None and not cfg.ratio >= 0:
        raise ParameterError("ratio must be non-negative")
    if cfg.L is not None and not cfg.L >= 0:
        raise ParameterError("L must be non-negative")
    if cfg.points < 2:
        raise ParameterError("points must be at least 2")
    if cfg.switching == "tabulated" and not cfg.profile:
        raise ConfigError("tabulated switching needs a profile file")
    if cfg.start is not None and cfg.stop is not None and not cfg.stop > cfg.start:
        raise ParameterError("stop must exceed start")
    if cfg.spacing == "log" and cfg.start is not None and not cfg.start > 0:
        raise ParameterError("log spacing needs a positive start")


def emit_config(cfg: RunConfig) -> str:
    """Canonical text for ``cfg`` in SI units; ``parse_config`` inverts it exactly."""
    by_section = {s: [] for s in SECTIONS}
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        section, kind = _SCHEMA[f.name]
        key = "name" if f.name == "command" else f.name
        if kind == "variable":
            text = f"{value!r} {SI_UNIT[VARIABLE_DIMENSION[cfg.variable]]}"
        elif kind in SI_UNIT:
            text = f"{value!r} {SI_UNIT[kind]}"
        elif kind in ("float", "int"):
            text = repr(value)
        else:
            if value == "":
                continue
            text = str(value)
        by_section[section].append(f"{key} = {text}")
    chunks = []
    for s in SECTIONS:
        if by_section[s]:
            chunks.append(f"[{s}]\n" + "\n".join(by_section[s]) + "\n")
    return "\n".join(chunks)


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(emit_config(cfg).encode()).hexdigest()


# ---------------------------------------------------------------------------
# manifest


@dataclass
class RunManifest:
    """Resolved inputs, derived quantities and provenance of one run.

    ``config_text`` is the canonical configuration, so a manifest can be fed
    back in to repeat the run.  ``wall_time`` is excluded from :meth:`digest`.
    """

    resolved: dict
    derived: dict
    version: str
    config_hash: str
    config_text: str
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def digest(self) -> str:
        body = {k: v for k, v in asdict(self).items() if k != "wall_time"}
        return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()

    def to_json(self) -> str:
        data = asdict(self)
        data["digest"] = self.digest()
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        data = json.loads(text)
        data.pop("digest", None)
        return cls(**data)

    def config(self) -> RunConfig:
        return parse_config(self.config_text)


def build_manifest(cfg: RunConfig, wall_time: float = 0.0) -> RunManifest:
    from . import __version__

    exp = cfg.experiment()
    cond = derive_condensate(exp.condensate)
    det = exp.detector()
    p = exp.dimensionless()
    g_ab = coupling_ab(cfg.a_ab, reduced_mass(cfg.m_a, cfg.m_b))
    resolved = {f.name: getattr(cfg, f.name) for f in fields(RunConfig)}
    derived = {
        "g_bb": cond.g_bb, "c_s": cond.c_s, "xi": cond.xi, "g_ab": g_ab, "sigma": det.sigma,
        "lambda_bar_sq": p.lambda_bar_sq, "T_bar": p.T_bar, "Omega_bar": p.Omega_bar, "L": p.L,
    }
    return RunManifest(resolved=resolved, derived=derived, version=__version__,
                       config_hash=config_hash(cfg), config_text=emit_config(cfg),
                       wall_time=wall_time)

"""Atomic-physics inputs and their reduction to detector parameters.

Every observable in the package is evaluated on a :class:`DimensionlessParams`
record.  The functions here build that record from species data (masses,
scattering lengths, density), the impurity trap frequency, the switching
timescale and the detector separation.  All quantities are SI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple


class ParameterError(ValueError):
    """Raised for physically inadmissible inputs (non-positive mass, ...)."""


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.054571817e-34            # J s
    bohr_radius: float = 5.29177210903e-11   # m
    atomic_mass_unit: float = 1.66053906660e-27  # kg

    def __post_init__(self):
        for name in ("hbar", "bohr_radius", "atomic_mass_unit"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")


CONSTANTS = PhysicalConstants()
HBAR = CONSTANTS.hbar
A0 = CONSTANTS.bohr_radius
AMU = CONSTANTS.atomic_mass_unit
SPEED_OF_LIGHT = 299792458.0


def _require_positive(**values):
    for name, v in values.items():
        if not (v > 0 and math.isfinite(v)):
            raise ParameterError(f"{name} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class CondensateSpec:
    """Boson species forming the condensate."""

    m_b: float
    a_bb: float
    rho0: float

    def __post_init__(self):
        _require_positive(m_b=self.m_b, a_bb=self.a_bb, rho0=self.rho0)


@dataclass(frozen=True)
class DerivedCondensate:
    """Mean-field quantities of a uniform condensate.

    ``m_b`` and ``rho0`` are carried along because the Bogoliubov
    diagnostics need them.
    """

    g_bb: float
    c_s: float
    xi: float
    m_b: float
    rho0: float


@dataclass(frozen=True)
class DetectorSpec:
    """A trapped impurity used as a detector.

    ``sigma`` is the width of the ground-to-first-excited transition density,
    ``sqrt(hbar / (m_a * omega_trap))``, and is derived, not passed in.
    """

    m_a: float
    omega_trap: float
    a_ab_bar: float
    T_switch: float
    sigma: float = field(init=False)

    def __post_init__(self):
        _require_positive(m_a=self.m_a, omega_trap=self.omega_trap, T_switch=self.T_switch)
        if not math.isfinite(self.a_ab_bar):
            raise ParameterError("a_ab_bar must be finite")
        object.__setattr__(self, "sigma", math.sqrt(HBAR / (self.m_a * self.omega_trap)))


@dataclass(frozen=True)
class PairGeometry:
    """Detector separation, either fixed or tied to ``c_s * T``.

    When ``constraint_ratio`` is set it wins over ``separation_L``.
    """

    separation_L: float | None = None
    constraint_ratio: float | None = None

    def __post_init__(self):
        if self.separation_L is None and self.constraint_ratio is None:
            raise ParameterError("geometry needs separation_L or constraint_ratio")
        for name in ("separation_L", "constraint_ratio"):
            v = getattr(self, name)
            if v is not None and not (v >= 0 and math.isfinite(v)):
                raise ParameterError(f"{name} must be non-negative, got {v!r}")

    def resolve(self, T_bar: float) -> float:
        if self.constraint_ratio is not None:
            return self.constraint_ratio * T_bar
        return self.separation_L


@dataclass(frozen=True)
class DimensionlessParams:
    """Reduced parameters: lengths in metres, ``Omega_bar`` in 1/m.

    ``lambda_bar_sq`` has units of area so that the excitation probability
    computed from the set is a pure number.
    """

    lambda_bar_sq: float
    T_bar: float
    Omega_bar: float
    sigma: float
    L: float

    def __post_init__(self):
        if not self.lambda_bar_sq >= 0:
            raise ParameterError("lambda_bar_sq must be non-negative")
        if not self.L >= 0:
            raise ParameterError("separation L must be non-negative")

    @property
    def sigma_eff(self) -> float:
        """``sqrt(sigma**2 + T_bar**2)``, the combined Gaussian width."""
        return math.hypot(self.sigma, self.T_bar)

    def replace(self, **changes) -> "DimensionlessParams":
        return replace(self, **changes)

    def rescaled(self, factor: float) -> "DimensionlessParams":
        """Same physics in a length unit ``factor`` times smaller."""
        return DimensionlessParams(
            lambda_bar_sq=self.lambda_bar_sq * factor**2,
            T_bar=self.T_bar * factor,
            Omega_bar=self.Omega_bar / factor,
            sigma=self.sigma * factor,
            L=self.L * factor,
        )


def reduced_mass(m_a: float, m_b: float) -> float:
    """``m_a m_b / (m_a + m_b)``; an infinite partner mass returns the other mass."""
    for name, v in (("m_a", m_a), ("m_b", m_b)):
        if not v > 0:
            raise ParameterError(f"{name} must be positive, got {v!r}")
    if math.isinf(m_b):
        return m_a
    if math.isinf(m_a):
        return m_b
    return m_a * m_b / (m_a + m_b)


def coupling_bb(a_bb: float, m_b: float) -> float:
    """Boson-boson contact coupling ``4 pi hbar^2 a_bb / m_b`` in J m^3."""
    _require_positive(a_bb=a_bb, m_b=m_b)
    return 4.0 * math.pi * HBAR**2 * a_bb / m_b


def coupling_ab(a_ab: float, mu_ab: float) -> float:
    """Impurity-boson coupling ``2 pi hbar^2 a_ab / mu_ab``; signed like ``a_ab``."""
    if not mu_ab > 0:
        raise ParameterError(f"reduced mass must be positive, got {mu_ab!r}")
    return 2.0 * math.pi * HBAR**2 * a_ab / mu_ab


def derive_condensate(spec: CondensateSpec) -> DerivedCondensate:
    g_bb = coupling_bb(spec.a_bb, spec.m_b)
    c_s = math.sqrt(g_bb * spec.rho0 / spec.m_b)
    xi = HBAR / (math.sqrt(2.0) * spec.m_b * c_s)
    return DerivedCondensate(g_bb=g_bb, c_s=c_s, xi=xi, m_b=spec.m_b, rho0=spec.rho0)


def to_dimensionless(cond: DerivedCondensate, det: DetectorSpec,
                     geom: PairGeometry) -> DimensionlessParams:
    mu = reduced_mass(det.m_a, cond.m_b)
    g_ab = coupling_ab(det.a_ab_bar, mu)
    T_bar = cond.c_s * det.T_switch
    return DimensionlessParams(
        lambda_bar_sq=g_ab**2 / (cond.g_bb * HBAR * cond.c_s),
        T_bar=T_bar,
        Omega_bar=det.omega_trap / cond.c_s,
        sigma=det.sigma,
        L=geom.resolve(T_bar),
    )


class UDWDetector(NamedTuple):
    """Momentum-coupled detector in a medium where signals travel at ``c``."""

    coupling: float
    gap: float
    switching_time: float
    c: float
    sigma: float
    L: float


def udw_equivalent(params: DimensionlessParams, cond: DerivedCondensate,
                   c: float = SPEED_OF_LIGHT) -> UDWDetector:
    """Map the polaron onto a relativistic detector coupled to a field with speed ``c``.

    ``coupling**2`` has units of J m^3 (action times length squared over time);
    gap and switching time are rescaled so that their product is unchanged.
    """
    _require_positive(c=c)
    # g_ab / sqrt(g_bb) recovered from lambda_bar^2 = g_ab^2 / (g_bb hbar c_s)
    g_ratio = math.sqrt(params.lambda_bar_sq * HBAR * cond.c_s)
    Omega = params.Omega_bar * cond.c_s
    T = params.T_bar / cond.c_s
    return UDWDetector(
        coupling=math.sqrt(c / cond.c_s) * g_ratio,
        gap=(c / cond.c_s) * Omega,
        switching_time=(cond.c_s / c) * T,
        c=c,
        sigma=params.sigma,
        L=params.L,
    )


def udw_inverse(det: UDWDetector) -> DimensionlessParams:
    """Inverse of :func:`udw_equivalent`; the sound speed drops out."""
    return DimensionlessParams(
        lambda_bar_sq=det.coupling**2 / (HBAR * det.c),
        T_bar=det.c * det.switching_time,
        Omega_bar=det.gap / det.c,
        sigma=det.sigma,
        L=det.L,
    )


# ---------------------------------------------------------------------------
# species presets and a full experiment record

RB87 = CondensateSpec(m_b=87 * AMU, a_bb=100 * A0, rho0=5e14 * 1e6)


@dataclass(frozen=True)
class ImpuritySpecies:
    m_a: float
    a_aa: float  # recorded only; leading-order formulas never use it


K39 = ImpuritySpecies(m_a=39 * AMU, a_aa=4 * A0)
DEFAULT_A_AB = 1000 * A0
QUOTED_SOUND_SPEED = 4.4e-3  # m/s, the quoted value for the Rb condensate


@dataclass(frozen=True)
class Experiment:
    """Complete physical parameter set for a two-impurity run.

    Defaults describe K-39 impurities in a Rb-87 condensate probed for
    ``T = 0.065 ms`` at ``L = 5.25 c_s T`` with a 35 krad/s trap.
    """

    condensate: CondensateSpec = RB87
    m_a: float = K39.m_a
    omega_trap: float = 35e3
    a_ab: float = DEFAULT_A_AB
    T_switch: float = 0.065e-3
    geometry: PairGeometry = PairGeometry(constraint_ratio=5.25)

    def derived(self) -> DerivedCondensate:
        return derive_condensate(self.condensate)

    def detector(self) -> DetectorSpec:
        return DetectorSpec(m_a=self.m_a, omega_trap=self.omega_trap,
                            a_ab_bar=self.a_ab, T_switch=self.T_switch)

    def dimensionless(self) -> DimensionlessParams:
        return to_dimensionless(self.derived(), self.detector(), self.geometry)

    def with_value(self, variable: str, x: float) -> "Experiment":
        """Copy with one scan variable replaced (``Omega``, ``T``, ``L`` or ``a_ab``)."""
        if variable == "Omega":
            return replace(self, omega_trap=x)
        if variable == "T":
            return replace(self, T_switch=x)
        if variable == "a_ab":
            return replace(self, a_ab=x)
        if variable == "L":
            return replace(self, geometry=PairGeometry(separation_L=x))
        raise ParameterError(f"unknown scan variable {variable!r}")

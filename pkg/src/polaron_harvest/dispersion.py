"""Bogoliubov excitations of a uniform condensate.

Used to check how far the linear ("sound cone") dispersion assumed by the
detector model holds at a given wavenumber.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .params import HBAR, DerivedCondensate, ParameterError


class BogoliubovPoint(NamedTuple):
    k: float       # 1/m
    omega: float   # rad/s
    u: float
    v: float


def bogoliubov_omega(k: float, cond: DerivedCondensate) -> float:
    """``sqrt(c_s^2 k^2 + (hbar k^2 / 2 m_b)^2)``."""
    free = HBAR * k * k / (2.0 * cond.m_b)
    return math.sqrt((cond.c_s * k) ** 2 + free * free)


def bogoliubov_point(k: float, cond: DerivedCondensate) -> BogoliubovPoint:
    """Mode frequency and real Bogoliubov coefficients, ``u > 0 >= v``.

    ``u^2 = X + 1/2`` and ``v^2 = X - 1/2`` with
    ``X = (hbar^2 k^2 / 2 m_b + g_bb rho0) / (2 hbar omega)``.

    Raises
    ------
    ParameterError
        For ``k <= 0``; the condensate mode is not an excitation.
    """
    if not (k > 0 and math.isfinite(k)):
        raise ParameterError(f"k must be positive and finite, got {k!r}")
    omega = bogoliubov_omega(k, cond)
    X = (HBAR**2 * k * k / (2.0 * cond.m_b) + cond.g_bb * cond.rho0) / (2.0 * HBAR * omega)
    return BogoliubovPoint(k=k, omega=omega, u=math.sqrt(X + 0.5), v=-math.sqrt(X - 0.5))


def relativistic_error(k: float, cond: DerivedCondensate) -> float:
    """Relative shortfall of the phonon approximation, ``(omega - c_s k) / omega``.

    Written as ``q^2 / (sqrt(1 + q^2) (sqrt(1 + q^2) + 1))`` with
    ``q = hbar k / (2 m_b c_s)``, which avoids the subtraction at small ``k``.
    Equals ``1 - sqrt(2/3)`` at ``k = 1/xi``.
    """
    if not k > 0:
        raise ParameterError(f"k must be positive, got {k!r}")
    q = HBAR * k / (2.0 * cond.m_b * cond.c_s)
    r = math.sqrt(1.0 + q * q)
    return q * q / (r * (r + 1.0))

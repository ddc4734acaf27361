"""Closed-form two-detector observables for Gaussian switching and smearing.

Sign conventions
----------------
``M = M_plus + M_minus`` where ``M_plus`` is real (vacuum-fluctuation part) and
``M_minus = 1j * m_minus_im`` is purely imaginary (causal part).  Only ``|M|``
enters the negativity; the split feeds the signaling estimator.

All exponentials are combined analytically before evaluation, so no factor
larger than one is ever formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import DimensionlessParams, ParameterError
from .special import SQRT_PI, cubic_gauss_tail_scaled, dawson, erf, gauss_erfi, cubic_gauss_tail


class DegenerateGeometryError(ParameterError):
    """Negative separation or otherwise unusable detector geometry."""


class PerturbativeRegimeError(ValueError):
    """Excitation probabilities too large for the leading-order state."""


# below this L / sqrt(sigma^2 + T_bar^2) the series branches are used
SMALL_SEPARATION = 1e-6


def _check_widths(p: DimensionlessParams):
    if not (p.T_bar > 0 and p.sigma > 0):
        raise ParameterError(f"T_bar and sigma must be positive (T_bar={p.T_bar!r}, sigma={p.sigma!r})")


def _check_separation(p: DimensionlessParams):
    if not p.L >= 0:
        raise DegenerateGeometryError(f"separation must be non-negative, got {p.L!r}")


def l_term_closed(p: DimensionlessParams) -> float:
    """Single-detector excitation probability.

    ``L = lam^2 T^2 / (2 pi S^2) * exp(-T^2 W^2) * J3(a)`` with
    ``S = sigma^2 + T^2`` and ``a = T^2 W / sqrt(S)``, where ``J3`` is the
    scaled cubic Gaussian tail from :mod:`polaron_harvest.special`.  The
    expanded form is
    ``exp(-T^2 W^2) [2 sqrt(S) (S + T^4 W^2) - sqrt(pi) T^2 W erfcx(a) (2 T^4 W^2 + 3 S)] / (8 pi S^(7/2))``.
    """
    _check_widths(p)
    if p.lambda_bar_sq == 0:
        return 0.0
    T2 = p.T_bar**2
    S = p.sigma**2 + T2
    a = T2 * p.Omega_bar / math.sqrt(S)
    if a >= 0:
        gauss = math.exp(-T2 * p.Omega_bar**2)
        tail = cubic_gauss_tail(a)
    else:
        # negative gap: exp(-T^2 W^2 + a^2) = exp(-T^2 W^2 sigma^2 / S) <= 1
        gauss = math.exp(-T2 * p.Omega_bar**2 * p.sigma**2 / S)
        tail = cubic_gauss_tail_scaled(a)
    return p.lambda_bar_sq * T2 * gauss * tail / (2.0 * math.pi * S * S)


def q_beta_closed(k, p: DimensionlessParams):
    """``2 Q_beta(k)`` for the Gaussian profile ``beta(u) = exp(-u^2/2)``.

    ``2 pi exp(-W^2 T^2) [exp(-k^2 T^2) - 1j * exp(-k^2 T^2) erfi(k T)]``,
    with the second product taken from Dawson's function.
    """
    k = np.asarray(k, dtype=float)
    kt = k * p.T_bar
    pref = 2.0 * math.pi * math.exp(-(p.Omega_bar * p.T_bar) ** 2)
    out = pref * (np.exp(-kt * kt) - 1j * gauss_erfi(kt))
    return out[()] if out.ndim == 0 else out


# beyond this L / (2 sqrt(S)) the Dawson bracket is summed asymptotically
LARGE_SEPARATION = 6.0


def _dawson_bracket_series(x: float) -> float:
    """``F(x) (4 x^2 - 2) - 2 x`` for large ``x`` without cancellation.

    With ``F(x) ~ sum_n d_n``, ``d_n = (2n-1)!! / (2^(n+1) x^(2n+1))`` the
    bracket collapses to ``sum_{n>=1} 4 n d_n``; the series is cut at its
    smallest term, leaving an error of order ``exp(-x^2)``.
    """
    d = 1.0 / (2.0 * x)
    z = 1.0 / (2.0 * x * x)
    total = 0.0
    prev = math.inf
    n = 0
    while True:
        d *= (2 * n + 1) * z
        n += 1
        term = 4.0 * n * d
        if term >= prev or term < 1e-17 * total:
            break
        total += term
        prev = term
    return total


def m_plus_closed(p: DimensionlessParams) -> float:
    """Real (vacuum) part of the non-local term.

    With ``x = L / (2 sqrt(S))``:
    ``exp(-T^2 W^2) [2 F(x) (L^2 - 2S) - 2 L sqrt(S)] / (16 pi L S^(5/2))``
    times ``lam^2 T^2``, ``F`` being Dawson's function.  ``L = 0`` returns the
    analytic limit.
    """
    _check_widths(p)
    _check_separation(p)
    T2 = p.T_bar**2
    S = p.sigma**2 + T2
    rootS = math.sqrt(S)
    pref = p.lambda_bar_sq * T2 * math.exp(-T2 * p.Omega_bar**2)
    L = p.L
    if L < SMALL_SEPARATION * rootS:
        L2 = L * L
        return pref * (-S * S / 4.0 + L2 * S / 12.0 - L2 * L2 / 80.0) / (math.pi * S**4)
    x = L / (2.0 * rootS)
    if x >= LARGE_SEPARATION:
        bracket = 2.0 * S * _dawson_bracket_series(x)
    else:
        bracket = 2.0 * float(dawson(x)) * (L * L - 2.0 * S) - 2.0 * L * rootS
    return pref * bracket / (16.0 * math.pi * L * S**2.5)


def m_minus_closed(p: DimensionlessParams) -> float:
    """Imaginary part of the causal term, ``M_minus = 1j * m_minus_closed(p)``.

    ``exp(-L^2/(4 sigma^2)) * exp(L^2 T^2 / (4 sigma^2 S))`` is folded into
    ``exp(-L^2/(4S))`` before exponentiation.
    """
    _check_widths(p)
    _check_separation(p)
    T = p.T_bar
    T2 = T * T
    s = p.sigma
    s2 = s * s
    S = s2 + T2
    rootS = math.sqrt(S)
    pref = p.lambda_bar_sq * T2 * math.exp(-T2 * p.Omega_bar**2)
    L = p.L
    if L < SMALL_SEPARATION * rootS:
        L2 = L * L
        c0 = T * (T2 + 3.0 * s2) / (8.0 * math.pi * s**3 * S * S)
        c2 = T * (3.0 * T2 * T2 + 10.0 * T2 * s2 + 15.0 * s2 * s2) / (96.0 * math.pi * s**5 * S**3)
        return pref * (c0 - c2 * L2)
    y = L * T / (2.0 * s * rootS)
    first = SQRT_PI * s**3 * math.exp(-L * L / (4.0 * S)) * (L * L - 2.0 * S) * float(erf(y))
    second = 2.0 * L * T * rootS * (2.0 * s2 + T2) * math.exp(-L * L / (4.0 * s2))
    return -pref * (first - second) / (16.0 * math.pi * L * s**3 * S**2.5)


def m_closed(p: DimensionlessParams) -> complex:
    return complex(m_plus_closed(p), m_minus_closed(p))


def negativity(l_term: float, m_abs: float) -> float:
    """``max(|M| - L, 0)`` for identical detectors."""
    return max(m_abs - l_term, 0.0)


def signaling_estimator(n_minus: float, n: float) -> float:
    """Fraction of the negativity attributable to signalling, in ``[0, 1]``.

    ``n_minus`` is ``max(0, |M_minus| - L)``; returns 0 when ``n`` is 0.
    """
    if not n > 0:
        return 0.0
    return min(max(n_minus / n, 0.0), 1.0)


def l_cross_closed_or_numeric(p: DimensionlessParams, rel_tol: float = 1e-10) -> float:
    """Cross excitation term ``L_AB``; no closed form exists, so this integrates."""
    from .oracle import l_cross_numeric

    return l_cross_numeric(p, rel_tol=rel_tol)


@dataclass(frozen=True)
class HarvestResult:
    l_term: float
    l_cross: float
    m_plus: float
    m_minus_im: float
    m_abs: float
    negativity: float
    signaling: float

    @property
    def m(self) -> complex:
        return complex(self.m_plus, self.m_minus_im)

    def as_row(self) -> tuple:
        return (self.l_term, self.l_cross, self.m_plus, self.m_minus_im,
                self.m_abs, self.negativity, self.signaling)

    @classmethod
    def zero(cls) -> "HarvestResult":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def harvest(p: DimensionlessParams, cross: bool = True) -> HarvestResult:
    """Evaluate every observable at one parameter point.

    ``cross=False`` skips the (quadrature-backed) ``L_AB`` and reports NaN.
    """
    l_term = l_term_closed(p)
    m_plus = m_plus_closed(p)
    m_minus = m_minus_closed(p)
    m_abs = math.hypot(m_plus, m_minus)
    n = negativity(l_term, m_abs)
    n_minus = max(0.0, abs(m_minus) - l_term)
    l_cross = l_cross_closed_or_numeric(p) if cross else math.nan
    return HarvestResult(
        l_term=l_term,
        l_cross=l_cross,
        m_plus=m_plus,
        m_minus_im=m_minus,
        m_abs=m_abs,
        negativity=n,
        signaling=signaling_estimator(n_minus, n),
    )


# ---------------------------------------------------------------------------
# two-qubit state

BASIS = ("gg", "ge", "eg", "ee")


def assemble_state(l_aa: float, l_bb: float, l_ab: complex, m: complex) -> np.ndarray:
    """Leading-order joint state of the detectors in the ``|gg>, |ge>, |eg>, |ee>`` basis."""
    if l_aa < 0 or l_bb < 0:
        raise ValueError("excitation probabilities must be non-negative")
    if l_aa + l_bb > 1:
        raise PerturbativeRegimeError(f"L_AA + L_BB = {l_aa + l_bb:.3g} exceeds 1")
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0 - l_aa - l_bb
    rho[0, 3] = np.conj(m)
    rho[3, 0] = m
    rho[1, 1] = l_bb
    rho[2, 2] = l_aa
    rho[1, 2] = l_ab
    rho[2, 1] = np.conj(l_ab)
    return rho


def partial_transpose(rho: np.ndarray) -> np.ndarray:
    """Transpose on the second qubit."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    return r.transpose(0, 3, 2, 1).reshape(4, 4)


def state_negativity(rho: np.ndarray) -> float:
    """Sum of the magnitudes of the negative eigenvalues of the partial transpose."""
    ev = np.linalg.eigvalsh(partial_transpose(rho))
    return float(-ev[ev < 0].sum())

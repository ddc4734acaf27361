"""Error-function family in forms that never overflow.

The closed-form observables need ``erfc``, ``erf`` and ``erfi`` multiplied by
Gaussians that are individually out of double range.  Everything is exposed
through the scaled functions ``erfcx(a) = exp(a**2) erfc(a)`` and Dawson's
integral ``F(x) = exp(-x**2) int_0^x exp(t**2) dt``; a bare :func:`erfi` exists
only for moderate arguments.

The elementary evaluations are delegated to :mod:`scipy.special` (Faddeeva
package based, ~1e-16 relative).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

SQRT_PI = math.sqrt(math.pi)
_TWO_OVER_SQRT_PI = 2.0 / SQRT_PI


def erf(x):
    return _sp.erf(x)


def erfc(x):
    return _sp.erfc(x)


def erfcx(a):
    """``exp(a**2) * erfc(a)`` without intermediate overflow."""
    return _sp.erfcx(a)


def dawson(x):
    """Dawson's integral; odd, maximum 0.5410442246 at x = 0.9241388730."""
    return _sp.dawsn(x)


def gauss_erfi(x):
    """``exp(-x**2) * erfi(x)``, equal to ``2/sqrt(pi) * dawson(x)``; bounded for all x."""
    return _TWO_OVER_SQRT_PI * _sp.dawsn(x)


def erfi(x):
    """Imaginary error function.

    Returns ``inf`` with the sign of ``x`` beyond |x| ~ 26.6 rather than raising;
    callers in this package use :func:`gauss_erfi` instead.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        out = gauss_erfi(x) * np.exp(x * x)
    out = np.where(np.isnan(out) & ~np.isnan(x), np.copysign(np.inf, x), out)
    return out[()] if out.ndim == 0 else out


def _cubic_tail_series(a):
    # asymptotic sum_n (-1)^n (2n+3)! / (n! (2a)^(2n+4)), truncated at the smallest term
    a = float(a)
    z = 1.0 / (2.0 * a) ** 2
    term = 6.0 * z * z
    total = term
    n = 0
    while True:
        nxt = -term * (2 * n + 4) * (2 * n + 5) / (n + 1) * z
        if abs(nxt) >= abs(term) or abs(nxt) < 1e-17 * abs(total):
            break
        total += nxt
        term = nxt
        n += 1
    return total


def cubic_gauss_tail(a):
    """``J3(a) = int_0^inf s**3 exp(-s**2 - 2 a s) ds`` for ``a >= 0``.

    Closed form ``(1 + a^2)/2 - sqrt(pi)/4 * a (3 + 2 a^2) erfcx(a)``; the two
    terms cancel as ``a`` grows, so ``a >= 6`` switches to the asymptotic series,
    whose smallest term is below ``exp(-36)``.
    """
    a = float(a)
    if a < 0:
        raise ValueError("cubic_gauss_tail needs a >= 0; use cubic_gauss_tail_scaled")
    if a >= 6.0:
        return _cubic_tail_series(a)
    return 0.5 * (1.0 + a * a) - 0.25 * SQRT_PI * a * (3.0 + 2.0 * a * a) * float(erfcx(a))


def cubic_gauss_tail_scaled(a):
    """``exp(-a**2) * J3(a)``, finite for every real ``a``.

    Equals ``int_a^inf (y - a)**3 exp(-y**2) dy``.
    """
    a = float(a)
    if a >= 0:
        return math.exp(-a * a) * cubic_gauss_tail(a)
    return 0.5 * (1.0 + a * a) * math.exp(-a * a) - 0.25 * SQRT_PI * a * (3.0 + 2.0 * a * a) * float(erfc(a))

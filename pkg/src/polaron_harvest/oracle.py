"""Direct numerical evaluation of the harvesting observables.

Everything here integrates the defining momentum-space (or time-domain)
expressions with :func:`polaron_harvest.quadrature.adaptive_quad` and shares
no algebra with :mod:`polaron_harvest.response`, so the two modules check
each other.

Radial integrands (``k`` in 1/m)::

    L        lam^2 T^2 / (2 pi)   k^3 exp(-T^2 (k + W)^2 - sigma^2 k^2)
    L_cross  lam^2 T^2 / (2 pi)   k^3 exp(-T^2 (k + W)^2 - sigma^2 k^2) sinc(k L)
    M_plus  -lam^2 T^2 / (2 pi L) k^2 exp(-(W^2 + k^2) T^2 - sigma^2 k^2) sin(k L)
    M_minus +lam^2 T^2 / (2 pi L) k^2 exp(-W^2 T^2) exp(-k^2 T^2) erfi(k T) exp(-sigma^2 k^2) sin(k L)

``M_minus`` is the imaginary part of ``M``.  Its ``exp(-k^2 T^2) erfi(k T)``
factor only falls off like ``1/k``, so the upper limit is set by ``sigma``
alone.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .params import DimensionlessParams, ParameterError
from .quadrature import QuadResult, adaptive_quad
from .special import gauss_erfi

KINDS = ("L", "L_cross", "M_plus", "M_minus")

# Gaussian tails are cut where exp(-x^2) < exp(-144)
_TAIL = 12.0


class WindowError(ValueError):
    """The switching profile carries too much weight outside the integration window."""


class ModeCountError(MemoryError):
    """Finite-volume sum would need more modes than the guard allows."""


@dataclass(frozen=True)
class Integrand:
    """Radial integrand of one observable; ``evaluate`` accepts arrays."""

    kind: str
    params: DimensionlessParams

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown integrand kind {self.kind!r}; expected one of {KINDS}")
        p = self.params
        if not (p.T_bar > 0 and p.sigma > 0):
            raise ParameterError("T_bar and sigma must be positive")

    @property
    def _S(self) -> float:
        p = self.params
        return p.sigma**2 + p.T_bar**2

    def k_peak_shift(self) -> float:
        """Centre of the Gaussian envelope for the local terms (0 unless the gap is negative)."""
        if self.kind in ("L", "L_cross"):
            p = self.params
            return max(0.0, -p.T_bar**2 * p.Omega_bar / self._S)
        return 0.0

    def k_up(self) -> float:
        """Upper integration limit beyond which the integrand is below ``exp(-144)`` of its scale."""
        if self.kind == "M_minus":
            return _TAIL / self.params.sigma
        return self.k_peak_shift() + _TAIL / math.sqrt(self._S)

    def evaluate(self, k):
        p = self.params
        k = np.asarray(k, dtype=float)
        T2 = p.T_bar**2
        s2 = p.sigma**2
        pref = p.lambda_bar_sq * T2 / (2.0 * math.pi)
        if self.kind in ("L", "L_cross"):
            out = pref * k**3 * np.exp(-T2 * (k + p.Omega_bar) ** 2 - s2 * k * k)
            if self.kind == "L_cross":
                out = out * np.sinc(k * p.L / math.pi)
            return out
        # sin(kL)/L, with the L -> 0 limit k
        if p.L > 0:
            sin_over_L = np.sin(k * p.L) / p.L
        else:
            sin_over_L = k
        if self.kind == "M_plus":
            return -pref * k * k * np.exp(-(p.Omega_bar**2 + k * k) * T2 - s2 * k * k) * sin_over_L
        return (pref * math.exp(-p.Omega_bar**2 * T2) * k * k * gauss_erfi(k * p.T_bar)
                * np.exp(-s2 * k * k) * sin_over_L)

    __call__ = evaluate

    def zeros(self, k_hi: float) -> np.ndarray:
        """Sign changes of the integrand in ``(0, k_hi)``."""
        if self.kind == "L" or self.params.L == 0:
            return np.empty(0)
        n = int(math.floor(k_hi * self.params.L / math.pi))
        return math.pi / self.params.L * np.arange(1, n + 1)

    def integrate(self, lo: float = 0.0, hi: float | None = None, rel_tol: float = 1e-10,
                  abs_tol: float = 0.0, absolute: bool = False) -> QuadResult:
        """Integrate over ``[lo, hi]`` (default ``[0, k_up]``).

        ``absolute=True`` integrates ``|f|`` instead of ``f``.
        """
        if hi is None:
            hi = self.k_up()
        if hi <= lo:
            return QuadResult(0.0, 0.0, 0)
        max_width = None
        L = self.params.L
        if self.kind != "L" and L > 0:
            max_width = math.pi / (4.0 * L)
        breaks = list(self.zeros(hi))
        shift = self.k_peak_shift()
        if shift > 0:
            breaks.append(shift)
        f = self.evaluate
        if absolute:
            f = lambda k: np.abs(self.evaluate(k))  # noqa: E731
        return adaptive_quad(f, lo, hi, rel_tol, abs_tol, max_width=max_width, breakpoints=breaks)


def _value(res: QuadResult, full_output: bool):
    return res if full_output else float(res.value)


def l_term_numeric(p: DimensionlessParams, rel_tol: float = 1e-10, full_output: bool = False):
    """Excitation probability by radial quadrature."""
    if p.lambda_bar_sq == 0:
        return QuadResult(0.0, 0.0, 0) if full_output else 0.0
    return _value(Integrand("L", p).integrate(rel_tol=rel_tol), full_output)


def l_cross_numeric(p: DimensionlessParams, rel_tol: float = 1e-10, full_output: bool = False):
    """Cross excitation term ``L_AB``; equals ``L`` at zero separation."""
    if p.lambda_bar_sq == 0:
        return QuadResult(0.0, 0.0, 0) if full_output else 0.0
    # sinc makes the result small for distant detectors; 1e-16 of L bounds the useful precision
    floor = 1e-16 * l_term_numeric(p, rel_tol=1e-6)
    return _value(Integrand("L_cross", p).integrate(rel_tol=rel_tol, abs_tol=floor), full_output)


def m_plus_numeric(p: DimensionlessParams, rel_tol: float = 1e-10, full_output: bool = False):
    return _value(Integrand("M_plus", p).integrate(rel_tol=rel_tol), full_output)


def m_minus_numeric(p: DimensionlessParams, rel_tol: float = 1e-10, full_output: bool = False):
    """Imaginary part of the causal term."""
    return _value(Integrand("M_minus", p).integrate(rel_tol=rel_tol), full_output)


def m_numeric(p: DimensionlessParams, rel_tol: float = 1e-10) -> complex:
    """Non-local term ``M`` as a complex number.

    Real and imaginary parts are integrated separately so each meets
    ``rel_tol`` on its own scale.
    """
    if not p.L >= 0:
        raise ParameterError("separation must be non-negative")
    if p.lambda_bar_sq == 0:
        return 0j
    return complex(m_plus_numeric(p, rel_tol), m_minus_numeric(p, rel_tol))


# ---------------------------------------------------------------------------
# time-domain switching integral


class SwitchingProfile:
    """Time profile ``beta(u)`` of the coupling in units of ``T``.

    Subclasses set ``analytic`` when ``__call__`` accepts complex arguments and
    the function is entire with Gaussian decay, which lets
    :func:`q_beta_numeric` move the contour off the real axis.
    """

    analytic = False

    def __call__(self, u):
        raise NotImplementedError

    def default_window(self) -> tuple[float, float]:
        raise NotImplementedError

    def breakpoints(self) -> np.ndarray:
        return np.empty(0)


class GaussianSwitching(SwitchingProfile):
    """``beta(u) = exp(-u^2 / 2)``."""

    analytic = True

    def __init__(self, half_window: float = 10.0):
        self.half_window = float(half_window)

    def __call__(self, u):
        u = np.asarray(u)
        return np.exp(-0.5 * u * u)

    def default_window(self):
        return (-self.half_window, self.half_window)


class TopHatSwitching(SwitchingProfile):
    """Sudden switching: ``beta = 1`` on ``|u| <= width/2``."""

    def __init__(self, width: float = math.sqrt(2.0 * math.pi)):
        if not width > 0:
            raise ValueError("width must be positive")
        self.width = float(width)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(np.abs(u) <= 0.5 * self.width, 1.0, 0.0)

    def default_window(self):
        return (-0.5 * self.width, 0.5 * self.width)


class TabulatedSwitching(SwitchingProfile):
    """Linearly interpolated samples ``(u_i, beta_i)``; zero outside the table."""

    def __init__(self, u, beta):
        u = np.asarray(u, dtype=float)
        beta = np.asarray(beta, dtype=float)
        if u.ndim != 1 or u.shape != beta.shape or u.size < 2:
            raise ValueError("need matching 1-D arrays with at least two samples")
        if np.any(np.diff(u) <= 0):
            raise ValueError("sample times must be strictly increasing")
        self.u = u
        self.beta = beta

    @classmethod
    def from_file(cls, path, time_scale: float = 1.0) -> "TabulatedSwitching":
        """Read two whitespace-separated columns ``(t, beta)``; ``t / time_scale`` becomes ``u``."""
        data = np.loadtxt(path, ndmin=2)
        if data.shape[1] < 2:
            raise ValueError(f"{path}: expected two columns (t, beta)")
        return cls(data[:, 0] / time_scale, data[:, 1])

    def __call__(self, u):
        return np.interp(np.asarray(u, dtype=float), self.u, self.beta, left=0.0, right=0.0)

    def default_window(self):
        return (float(self.u[0]), float(self.u[-1]))

    def breakpoints(self):
        return self.u


def _tail_fraction(beta: SwitchingProfile, lo: float, hi: float) -> float:
    """Mass of ``|beta|`` on ``[lo - w, lo] + [hi, hi + w]`` relative to ``[lo, hi]``, ``w = hi - lo``."""
    w = hi - lo
    f = lambda u: np.abs(beta(u))  # noqa: E731
    inside = adaptive_quad(f, lo, hi, 1e-8, breakpoints=beta.breakpoints()).value
    if inside == 0:
        raise WindowError("switching profile vanishes on the window")
    outside = (adaptive_quad(f, lo - w, lo, 1e-6, abs_tol=1e-14 * inside,
                             breakpoints=beta.breakpoints()).value
               + adaptive_quad(f, hi, hi + w, 1e-6, abs_tol=1e-14 * inside,
                               breakpoints=beta.breakpoints()).value)
    return outside / inside


def _panel_edges(lo, hi, h, extra):
    n = max(1, int(math.ceil((hi - lo) / h)))
    edges = np.linspace(lo, hi, n + 1)
    if len(extra):
        edges = np.union1d(edges, [e for e in extra if lo < e < hi])
    return edges


class _CumulativeIntegral:
    """``phi(x) = int_lo^x g(t) dt`` from panel-wise Gauss-Legendre sums."""

    def __init__(self, g, edges, order=20):
        self.g = g
        self.edges = edges
        self.nodes, self.weights = np.polynomial.legendre.leggauss(order)
        a, b = edges[:-1], edges[1:]
        per_panel = self._gl(a, b)
        self.cum = np.concatenate([[0.0], np.cumsum(per_panel)])

    def _gl(self, a, b):
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        t = mid[:, None] + half[:, None] * self.nodes[None, :]
        return (self.g(t) @ self.weights) * half

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        j = np.clip(np.searchsorted(self.edges, flat, side="right") - 1, 0, len(self.edges) - 2)
        out = self.cum[j] + self._gl(self.edges[j], flat)
        return out.reshape(x.shape)


def q_beta_numeric(k: float, p: DimensionlessParams, beta: SwitchingProfile | None = None,
                   window: tuple[float, float] | None = None, rel_tol: float = 1e-10,
                   panel: float = 0.25, full_output: bool = False):
    """``2 Q_beta(k)`` as a two-dimensional time integral.

    Integrates ``beta(u) beta(u') exp(i W T (u + u')) exp(-i k T (u - u'))``
    over the triangle ``u > u'`` of the window: the outer ``u`` integral is
    adaptive, the inner ``u'`` integral is a cumulative panel Gauss-Legendre
    sum refined by panel halving.  The doubled value is returned so that it
    compares directly with :func:`polaron_harvest.response.q_beta_closed`
    (``2 pi`` at ``W = k = 0`` for the Gaussian profile).

    For analytic profiles both variables are shifted by ``i W T``.  This keeps
    ``u - u'`` real, so the ordering constraint is untouched, and replaces an
    oscillating integrand whose result is ``exp(-W^2 T^2)`` times smaller
    by a non-oscillating one of the result's own size.

    Raises
    ------
    WindowError
        If ``|beta|`` outside the window exceeds 1e-12 of its mass inside.
    """
    if not k >= 0:
        raise ValueError("k must be non-negative")
    beta = GaussianSwitching() if beta is None else beta
    lo, hi = beta.default_window() if window is None else window
    if not hi > lo:
        raise WindowError("empty window")
    tail = _tail_fraction(beta, lo, hi)
    if tail > 1e-12:
        raise WindowError(f"switching profile has tail mass {tail:.3e} outside [{lo}, {hi}]")

    a = p.Omega_bar * p.T_bar
    b = k * p.T_bar
    shift = min(a, 25.0) if (beta.analytic and a > 0) else 0.0
    c = 1j * shift

    def inner_g(t):
        u = t + c if shift else t
        return beta(u) * np.exp(1j * (a + b) * u)

    def outer_prefactor(t):
        u = t + c if shift else t
        return beta(u) * np.exp(1j * (a - b) * u)

    breaks = beta.breakpoints()

    def run(h):
        phi = _CumulativeIntegral(inner_g, _panel_edges(lo, hi, h, breaks))
        f = lambda t: outer_prefactor(t) * phi(t)  # noqa: E731
        return adaptive_quad(f, lo, hi, rel_tol, max_width=8 * h, breakpoints=breaks)

    h = panel
    prev = run(h)
    result = prev
    for _ in range(8):
        h *= 0.5
        result = run(h)
        scale = max(abs(result.value), 1e-300)
        if abs(result.value - prev.value) <= max(rel_tol * scale, 2 * result.error):
            break
        prev = result
    value = 2.0 * result.value
    if full_output:
        return QuadResult(value, 2.0 * max(result.error, abs(result.value - prev.value)), result.intervals)
    return value


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class SpectralReport:
    total: float
    fraction_above_cutoff: float
    k_cut: float


def spectral_report(integrand: Integrand, k_cut: float, absolute: bool = True,
                    rel_tol: float = 1e-9) -> SpectralReport:
    """Share of an integrand's weight at wavenumbers above ``k_cut``.

    ``absolute=True`` (default) measures weight as ``int |f|``, which keeps
    the fraction in ``[0, 1]`` for oscillating integrands.  ``absolute=False``
    uses ``|int_{k_cut} f| / |int f|``; for a sign-changing integrand that
    ratio is not bounded by one.  ``total`` is always the signed integral.
    """
    if not k_cut > 0:
        raise ValueError("k_cut must be positive")
    k_hi = integrand.k_up()
    total = integrand.integrate(rel_tol=rel_tol).value
    if absolute:
        whole = integrand.integrate(rel_tol=rel_tol, absolute=True).value
        above = integrand.integrate(lo=k_cut, rel_tol=rel_tol, absolute=True,
                                    abs_tol=1e-16 * whole).value if k_cut < k_hi else 0.0
        denom = whole
    else:
        denom = abs(total)
        above = abs(integrand.integrate(lo=k_cut, rel_tol=rel_tol, abs_tol=1e-16 * denom).value) \
            if k_cut < k_hi else 0.0
    frac = above / denom if denom > 0 else 0.0
    return SpectralReport(total=float(total), fraction_above_cutoff=float(frac), k_cut=float(k_cut))


def sample_integrands(p: DimensionlessParams, k) -> dict[str, np.ndarray]:
    """Integrand values on a wavenumber grid, keyed by kind."""
    k = np.asarray(k, dtype=float)
    return {kind: Integrand(kind, p).evaluate(k) for kind in ("L", "M_plus", "M_minus")}


def write_integrand_samples(path, p: DimensionlessParams, k, k_unit: float = 1e9) -> None:
    """Write ``k`` (in units of ``k_unit`` per metre, default 1/nm) and the integrands as CSV.

    Integrand values are per unit of the printed ``k`` so the columns still
    integrate to the observables.
    """
    k = np.asarray(k, dtype=float)
    samples = sample_integrands(p, k)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "L", "M_plus", "M_minus"])
        for i, kk in enumerate(k):
            w.writerow([f"{kk / k_unit:.17g}"] + [f"{samples[n][i] * k_unit:.17g}"
                                                  for n in ("L", "M_plus", "M_minus")])


MAX_MODES = 100_000_000


def finite_volume_l(p: DimensionlessParams, box_side: float, k_max: float | None = None) -> float:
    """Excitation probability in a periodic box of side ``box_side``.

    Sums ``lam^2 T^2 pi / V * |k| exp(-T^2 (|k| + W)^2 - sigma^2 k^2)`` over
    ``k = 2 pi n / box_side`` with ``n`` a non-zero integer triple and
    ``|k| <= k_max`` (default: the continuum integrand's cutoff).
    """
    if not box_side > 0:
        raise ValueError("box_side must be positive")
    if k_max is None:
        k_max = Integrand("L", p).k_up()
    dk = 2.0 * math.pi / box_side
    n_max = int(math.floor(k_max / dk))
    n_modes = (2 * n_max + 1) ** 3
    if n_modes > MAX_MODES:
        raise ModeCountError(f"{n_modes:.3g} modes exceed the limit of {MAX_MODES:.0e}")
    if n_max == 0:
        return 0.0
    T2 = p.T_bar**2
    s2 = p.sigma**2
    n = np.arange(-n_max, n_max + 1, dtype=float)
    ny, nz = np.meshgrid(n, n, indexing="ij")
    perp2 = (ny * ny + nz * nz) * dk * dk
    total = 0.0
    for nx in n:
        k2 = perp2 + (nx * dk) ** 2
        k = np.sqrt(k2)
        term = k * np.exp(-T2 * (k + p.Omega_bar) ** 2 - s2 * k2)
        term[k > k_max] = 0.0
        total += math.fsum(term.ravel())
    return p.lambda_bar_sq * T2 * math.pi / box_side**3 * total

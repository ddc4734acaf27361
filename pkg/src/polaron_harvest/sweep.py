"""One-dimensional parameter scans, peak search and validity annotation."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence, TextIO

import numpy as np

from .oracle import Integrand, spectral_report
from .params import DerivedCondensate, DimensionlessParams, Experiment, PairGeometry, ParameterError
from .response import HarvestResult, harvest

VARIABLES = ("Omega", "T", "L", "a_ab")

CSV_COLUMNS = ("x", "L_term", "L_cross", "M_plus", "M_minus_im", "M_abs", "negativity",
               "signaling", "frac_L", "frac_Mp", "frac_Mm", "pert_flag")

PERTURBATIVE_LIMIT = 0.01


@dataclass(frozen=True)
class SweepSpec:
    """A scan of one variable with everything else fixed.

    ``constraint_ratio`` ties the separation to ``ratio * c_s * T`` at every
    point; it cannot be combined with a scan over ``L``.
    """

    variable: str
    grid: tuple
    fixed: Experiment = Experiment()
    constraint_ratio: float | None = None
    refine_peak: bool = False

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ParameterError(f"scan variable must be one of {VARIABLES}, got {self.variable!r}")
        grid = tuple(float(x) for x in self.grid)
        if len(grid) < 2:
            raise ParameterError("grid needs at least two points")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ParameterError("grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        if self.constraint_ratio is not None and self.variable == "L":
            raise ParameterError("a separation constraint cannot be combined with an L scan")

    def experiment_at(self, x: float) -> Experiment:
        exp = self.fixed
        if self.constraint_ratio is not None:
            exp = replace(exp, geometry=PairGeometry(constraint_ratio=self.constraint_ratio))
        return exp.with_value(self.variable, x)


@dataclass(frozen=True)
class Validity:
    signaling: float
    frac_L: float
    frac_Mp: float
    frac_Mm: float
    perturbative: bool


@dataclass(frozen=True)
class SweepRow:
    x: float
    params: DimensionlessParams | None
    result: HarvestResult | None
    validity: Validity | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class PeakResult:
    """``flag`` is ``interior``, ``boundary`` or ``no_peak``."""

    x_star: float
    n_star: float
    bracket: tuple
    refinement_iters: int
    flag: str


def validity_annotate(row: SweepRow, cond: DerivedCondensate, k_cut_factor: float = 1.0) -> SweepRow:
    """Attach signaling, short-wavelength fractions above ``k_cut_factor / xi`` and the perturbative flag."""
    if not row.ok:
        return row
    k_cut = k_cut_factor / cond.xi
    fr = [spectral_report(Integrand(kind, row.params), k_cut).fraction_above_cutoff
          for kind in ("L", "M_plus", "M_minus")]
    v = Validity(signaling=row.result.signaling, frac_L=fr[0], frac_Mp=fr[1], frac_Mm=fr[2],
                 perturbative=row.result.l_term < PERTURBATIVE_LIMIT)
    return replace(row, validity=v)


def _evaluate_point(spec: SweepSpec, x: float, cross: bool, annotate: bool,
                    k_cut_factor: float) -> SweepRow:
    try:
        exp = spec.experiment_at(x)
        p = exp.dimensionless()
        row = SweepRow(x=x, params=p, result=harvest(p, cross=cross))
        if annotate:
            row = validity_annotate(row, exp.derived(), k_cut_factor)
        return row
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        return SweepRow(x=x, params=None, result=None, error=f"{type(exc).__name__}: {exc}")


def run_sweep(spec: SweepSpec, threads: int = 1, cross: bool = True, annotate: bool = True,
              k_cut_factor: float = 1.0) -> list[SweepRow]:
    """Evaluate every grid point; failures are stored in ``SweepRow.error``.

    Rows come back in grid order whatever the thread count.
    """
    work = lambda x: _evaluate_point(spec, x, cross, annotate, k_cut_factor)  # noqa: E731
    if threads <= 1:
        return [work(x) for x in spec.grid]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, spec.grid))


def negativity_objective(spec: SweepSpec) -> Callable[[float], float]:
    """Closed-form negativity as a function of the scan variable."""
    def objective(x: float) -> float:
        return harvest(spec.experiment_at(x).dimensionless(), cross=False).negativity
    return objective


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f: Callable[[float], float], a: float, b: float,
                       rel_tol: float = 1e-4, max_iter: int = 200):
    """Maximise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x), iterations)``."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while it < max_iter and (b - a) > rel_tol * max(abs(c), abs(d), 1e-300):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        it += 1
    return (c, fc, it) if fc >= fd else (d, fd, it)


def find_peak(rows: Sequence[SweepRow], refine: bool = False,
              objective: Callable[[float], float] | None = None,
              rel_tol: float = 1e-4) -> PeakResult:
    """Grid maximum of the negativity, optionally refined by golden section.

    ``objective`` is needed for refinement (see :func:`negativity_objective`).
    A maximum on the first or last grid point is reported as ``boundary``
    with a degenerate bracket; an all-zero curve as ``no_peak``.
    """
    good = [r for r in rows if r.ok]
    if len(good) < 3:
        raise ValueError("find_peak needs at least three evaluated rows")
    xs = np.array([r.x for r in good])
    ns = np.array([r.result.negativity for r in good])
    i = int(np.argmax(ns))
    if not ns[i] > 0:
        return PeakResult(x_star=float(xs[0]), n_star=0.0, bracket=(float(xs[0]), float(xs[0])),
                          refinement_iters=0, flag="no_peak")
    if i == 0 or i == len(xs) - 1:
        return PeakResult(x_star=float(xs[i]), n_star=float(ns[i]),
                          bracket=(float(xs[i]), float(xs[i])), refinement_iters=0, flag="boundary")
    lo, hi = float(xs[i - 1]), float(xs[i + 1])
    if not refine:
        return PeakResult(float(xs[i]), float(ns[i]), (lo, hi), 0, "interior")
    if objective is None:
        raise ValueError("refinement needs an objective")
    x, n, iters = golden_section_max(objective, lo, hi, rel_tol)
    if n < ns[i]:
        x, n = float(xs[i]), float(ns[i])
    return PeakResult(float(x), float(n), (lo, hi), iters, "interior")


@dataclass(frozen=True)
class RepetitionEstimate:
    events: int
    realizations: int


def repetition_estimate(l_term: float, target_rel_err: float) -> RepetitionEstimate:
    """Detection events and experimental runs for a Poisson-limited estimate of ``l_term``.

    ``events = ceil(1 / target_rel_err^2)``, ``realizations = ceil(events / l_term)``.
    A relative slack of 1e-12 absorbs representation error in the inputs
    (``1 / 0.1^2`` is ``100.00000000000001`` in binary).
    """
    if not 0 < l_term < 1:
        raise ValueError("l_term must lie in (0, 1)")
    if not target_rel_err > 0:
        raise ValueError("target_rel_err must be positive")
    events = math.ceil(target_rel_err**-2 * (1 - 1e-12))
    return RepetitionEstimate(events, math.ceil(events / l_term * (1 - 1e-12)))


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def sweep_rows_as_table(rows: Sequence[SweepRow]) -> list[list[str]]:
    out = []
    for r in rows:
        if not r.ok:
            out.append([_fmt(r.x)] + ["nan"] * (len(CSV_COLUMNS) - 1))
            continue
        res = r.result
        v = r.validity
        fr = (v.frac_L, v.frac_Mp, v.frac_Mm) if v else (math.nan,) * 3
        pert = ("1" if v.perturbative else "0") if v else ("1" if res.l_term < PERTURBATIVE_LIMIT else "0")
        out.append([_fmt(r.x)] + [_fmt(c) for c in res.as_row()] + [_fmt(f) for f in fr] + [pert])
    return out


def write_sweep_csv(rows: Sequence[SweepRow], fh: TextIO, manifest_hash: str = "",
                    label: str | None = None) -> None:
    """Write the sweep table with a ``# manifest_sha256=...`` comment line first.

    ``pert_flag`` is 1 where the excitation probability is below 0.01.
    """
    fh.write(f"# manifest_sha256={manifest_hash}\n")
    if label:
        fh.write(f"# series={label}\n")
    fh.write(",".join(CSV_COLUMNS) + "\n")
    for cells in sweep_rows_as_table(rows):
        fh.write(",".join(cells) + "\n")


def write_plot_data(series: Sequence[tuple[str, Sequence[SweepRow]]], fh: TextIO,
                    columns: Sequence[str] = ("negativity", "signaling")) -> None:
    """Whitespace-separated blocks (one per series, blank-line separated) for gnuplot-style tools."""
    idx = [CSV_COLUMNS.index(c) for c in columns]
    for label, rows in series:
        fh.write(f"# {label}\n# x " + " ".join(columns) + "\n")
        for cells in sweep_rows_as_table(rows):
            fh.write(" ".join([cells[0]] + [cells[i] for i in idx]) + "\n")
        fh.write("\n\n")


# ---------------------------------------------------------------------------
# figure presets

FIG2_T_VALUES = (0.05e-3, 0.065e-3, 0.08e-3)
FIG_RATIO = 5.25
PEAK_OMEGA = 35e3


def omega_decade(center: float = PEAK_OMEGA, n: int = 61) -> tuple:
    """Geometric grid spanning one decade centred on ``center``."""
    return tuple(np.geomspace(center / math.sqrt(10.0), center * math.sqrt(10.0), n))


def preset_specs(name: str, base: Experiment = Experiment(), n: int = 61) -> list[tuple[str, SweepSpec]]:
    """Scans behind the ``fig2`` and ``fig3`` presets: one Omega decade per switching time.

    The switching-time family ``{0.05, 0.065, 0.08} ms`` is a reconstruction
    centred on the 0.065 ms reference configuration.
    """
    if name not in ("fig2", "fig3"):
        raise ValueError(f"no sweep preset named {name!r}")
    specs = []
    for T in FIG2_T_VALUES:
        spec = SweepSpec(variable="Omega", grid=omega_decade(n=n), fixed=replace(base, T_switch=T),
                         constraint_ratio=FIG_RATIO, refine_peak=(name == "fig2"))
        specs.append((f"T={T * 1e3:g}ms", spec))
    return specs


def fig4_params(base: Experiment = Experiment()) -> DimensionlessParams:
    """Reference configuration for the integrand plot: T = 0.065 ms, 35 krad/s, L = 5.25 c_s T."""
    exp = replace(base, T_switch=0.065e-3, omega_trap=PEAK_OMEGA,
                  geometry=PairGeometry(constraint_ratio=FIG_RATIO))
    return exp.dimensionless()

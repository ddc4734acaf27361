"""Command-line entry point: ``polaron-harvest {derive,response,sweep,validate}``."""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import oracle, response
from .config import (ConfigError, RunConfig, RunManifest, build_manifest, parse_config)
from .dispersion import relativistic_error
from .params import QUOTED_SOUND_SPEED, ParameterError, derive_condensate
from .quadrature import QuadratureError
from .sweep import (SweepSpec, find_peak, fig4_params, negativity_objective,
                    preset_specs, run_sweep, write_plot_data, write_sweep_csv)

RESPONSE_COLUMNS = ("L_term", "L_cross", "M_plus", "M_minus_im", "M_abs", "negativity", "signaling")


def _fmt(v) -> str:
    return f"{float(v):.17g}"


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("HARVEST_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"HARVEST_THREADS must be an integer, got {env!r}") from None
    return 1


def load_config(args) -> RunConfig:
    if args.from_manifest:
        cfg = RunManifest.from_json(Path(args.from_manifest).read_text()).config()
    elif args.config:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    else:
        cfg = RunConfig()
    updates = {"command": args.command}
    if getattr(args, "preset", None):
        updates["preset"] = args.preset
    if getattr(args, "k_cut_factor", None) is not None:
        updates["k_cut_factor"] = args.k_cut_factor
    if getattr(args, "rel_tol", None) is not None:
        updates["oracle_rel_tol"] = args.rel_tol
    return cfg.with_updates(**updates)


def _write_manifest(args, cfg: RunConfig, started: float) -> RunManifest:
    manifest = build_manifest(cfg, wall_time=time.time() - started)
    target = args.manifest
    if target is None and args.out not in (None, "-"):
        target = str(args.out) + ".manifest.json"
    if target:
        Path(target).write_text(manifest.to_json())
    return manifest


def _require_gaussian(cfg: RunConfig):
    if cfg.switching != "gaussian":
        raise ConfigError("closed forms assume Gaussian switching; "
                          "tabulated profiles are only used by 'validate'")


# ---------------------------------------------------------------------------
# subcommands


def cmd_derive(cfg: RunConfig, args) -> int:
    exp = cfg.experiment()
    cond = derive_condensate(exp.condensate)
    det = exp.detector()
    p = exp.dimensionless()
    m = build_manifest(cfg).derived
    rows = [
        ("c_s [m/s]", cond.c_s),
        ("xi [m]", cond.xi),
        ("g_bb [J m^3]", cond.g_bb),
        ("g_ab [J m^3]", m["g_ab"]),
        ("sigma [m]", det.sigma),
        ("lambda_bar_sq [m^2]", p.lambda_bar_sq),
        ("T_bar [m]", p.T_bar),
        ("Omega_bar [1/m]", p.Omega_bar),
        ("L [m]", p.L),
        ("sigma/(c_s T)", det.sigma / p.T_bar),
        ("sigma/(c_s T) at c_s = 4.4 mm/s", det.sigma / (QUOTED_SOUND_SPEED * cfg.T)),
    ]
    with _output(args.out) as fh:
        width = max(len(name) for name, _ in rows)
        for name, value in rows:
            fh.write(f"{name:<{width}}  {value:.10g}\n")
    return 0


def evaluate_response(cfg: RunConfig, with_oracle: bool):
    """Closed-form row and, optionally, the oracle row and the largest relative deviation."""
    _require_gaussian(cfg)
    p = cfg.experiment().dimensionless()
    res = response.harvest(p)
    if not with_oracle:
        return res, None, None
    tol = cfg.quad_rel_tol
    num = {
        "L_term": oracle.l_term_numeric(p, tol),
        "M_plus": oracle.m_plus_numeric(p, tol),
        "M_minus_im": oracle.m_minus_numeric(p, tol),
    }
    closed = {"L_term": res.l_term, "M_plus": res.m_plus, "M_minus_im": res.m_minus_im}
    dev = max(_rel_dev(closed[k], num[k]) for k in num)
    return res, num, dev


def _rel_dev(a, b) -> float:
    d = abs(a - b)
    scale = max(abs(a), abs(b))
    return d / scale if scale > 0 else 0.0


def _agrees(a, b, rel_tol, abs_floor=1e-16) -> bool:
    return abs(a - b) <= max(rel_tol * max(abs(a), abs(b)), abs_floor)


def cmd_response(cfg: RunConfig, args) -> int:
    res, num, dev = evaluate_response(cfg, args.oracle)
    cols = list(RESPONSE_COLUMNS)
    vals = [_fmt(v) for v in res.as_row()]
    if num is not None:
        cols += [f"{k}_oracle" for k in num] + ["max_rel_dev"]
        vals += [_fmt(v) for v in num.values()] + [_fmt(dev)]
    with _output(args.out) as fh:
        fh.write(",".join(cols) + "\n" + ",".join(vals) + "\n")
    return 0


def _label_path(out: str, label: str) -> str:
    path = Path(out)
    tag = label.replace("=", "").replace("/", "_")
    return str(path.with_name(f"{path.stem}_{tag}{path.suffix or '.csv'}"))


def cmd_sweep(cfg: RunConfig, args) -> int:
    _require_gaussian(cfg)
    threads = _threads(args)
    preset = cfg.preset
    manifest = build_manifest(cfg)
    digest = manifest.digest()
    if preset == "fig4":
        p = fig4_params(cfg.experiment())
        k = np.linspace(0.0, 12.0 / p.sigma, 601)
        with _output(args.out) as fh:
            samples = oracle.sample_integrands(p, k)
            fh.write(f"# manifest_sha256={digest}\n# k in 1/nm, integrands per 1/nm\n")
            fh.write("k,L,M_plus,M_minus\n")
            for i, kk in enumerate(k):
                fh.write(",".join([_fmt(kk * 1e-9)] + [_fmt(samples[n][i] * 1e9)
                                                       for n in ("L", "M_plus", "M_minus")]) + "\n")
        if args.plot_data:
            with open(args.plot_data, "w") as fh:
                fh.write("# k[1/nm] L M_plus M_minus\n")
                for i, kk in enumerate(k):
                    fh.write(" ".join([_fmt(kk * 1e-9)] + [_fmt(samples[n][i] * 1e9)
                                                           for n in ("L", "M_plus", "M_minus")]) + "\n")
        return 0

    if preset in ("fig2", "fig3"):
        specs = preset_specs(preset, cfg.experiment(), n=cfg.points)
    else:
        spec = SweepSpec(variable=cfg.variable, grid=cfg.grid(), fixed=cfg.experiment(),
                         constraint_ratio=cfg.ratio if cfg.variable != "L" else None,
                         refine_peak=True)
        specs = [(f"{cfg.variable}", spec)]

    series = []
    failures = 0
    for label, spec in specs:
        rows = run_sweep(spec, threads=threads, k_cut_factor=cfg.k_cut_factor)
        series.append((label, rows))
        failures += sum(not r.ok for r in rows)
        for r in rows:
            if not r.ok:
                print(f"warning: {label} x={r.x:.6g}: {r.error}", file=sys.stderr)
        try:
            peak = find_peak(rows, refine=spec.refine_peak, objective=negativity_objective(spec))
            sig = max((r.result.signaling for r in rows if r.ok), default=math.nan)
            print(f"{label}: peak x={peak.x_star:.6g} negativity={peak.n_star:.6g} "
                  f"({peak.flag}), max signaling={sig:.4f}", file=sys.stderr)
        except ValueError as exc:
            print(f"{label}: no peak ({exc})", file=sys.stderr)

    if args.out in (None, "-") or len(series) == 1:
        with _output(args.out) as fh:
            for label, rows in series:
                write_sweep_csv(rows, fh, digest, label if len(series) > 1 else None)
    else:
        for label, rows in series:
            with open(_label_path(args.out, label), "w", newline="") as fh:
                write_sweep_csv(rows, fh, digest, label)
    if args.plot_data:
        with open(args.plot_data, "w") as fh:
            write_plot_data(series, fh)
    return 0 if failures == 0 else 3


def run_validation(cfg: RunConfig):
    """Diagnostics at the configured point; yields ``(name, value, limit, passed)``.

    ``limit`` is ``None`` for informational entries.
    """
    exp = cfg.experiment()
    cond = derive_condensate(exp.condensate)
    p = exp.dimensionless()
    checks = []
    k_cut = cfg.k_cut_factor / cond.xi
    for kind, limit in (("L", cfg.healing_limit_local), ("M_plus", cfg.healing_limit_local),
                        ("M_minus", cfg.healing_limit_Mm)):
        frac = oracle.spectral_report(oracle.Integrand(kind, p), k_cut).fraction_above_cutoff
        checks.append((f"fraction of {kind} weight above k_cut={cfg.k_cut_factor:g}/xi", frac, limit,
                       frac < limit))
    for factor in (0.1, 1.0):
        checks.append((f"dispersion error at k={factor:g}/xi",
                       relativistic_error(factor / cond.xi, cond), None, True))

    cont = oracle.l_term_numeric(p, cfg.quad_rel_tol)
    box = cfg.box_widths * max(p.sigma, p.T_bar)
    try:
        fv = oracle.finite_volume_l(p, box)
        dev = abs(fv - cont) / cont if cont > 0 else 0.0
        checks.append((f"finite-volume L at box={cfg.box_widths:g} widths (rel. dev.)", dev,
                       cfg.finite_volume_tol, dev < cfg.finite_volume_tol))
    except oracle.ModeCountError as exc:
        checks.append((f"finite-volume L ({exc})", math.nan, cfg.finite_volume_tol, False))

    if cfg.switching == "gaussian":
        pairs = [
            ("L", response.l_term_closed(p), cont),
            ("M_plus", response.m_plus_closed(p), oracle.m_plus_numeric(p, cfg.quad_rel_tol)),
            ("M_minus", response.m_minus_closed(p), oracle.m_minus_numeric(p, cfg.quad_rel_tol)),
            ("L_cross at L=0 vs L", response.l_term_closed(p),
             oracle.l_cross_numeric(p.replace(L=0.0), cfg.quad_rel_tol)),
        ]
        k_q = 1.0 / p.T_bar
        pairs.append(("Q_beta at k=1/T_bar", response.q_beta_closed(k_q, p),
                      oracle.q_beta_numeric(k_q, p, rel_tol=cfg.quad_rel_tol)))
        for name, a, b in pairs:
            checks.append((f"closed form vs quadrature: {name}", _rel_dev(a, b),
                           cfg.oracle_rel_tol, _agrees(a, b, cfg.oracle_rel_tol)))
    else:
        beta = oracle.TabulatedSwitching.from_file(cfg.profile, time_scale=cfg.T)
        k_q = 1.0 / p.T_bar
        res = oracle.q_beta_numeric(k_q, p, beta, rel_tol=cfg.quad_rel_tol, full_output=True)
        checks.append(("tabulated Q_beta at k=1/T_bar (abs. error estimate)", res.error, 1e-6,
                       res.error <= 1e-6))
    return checks


def cmd_validate(cfg: RunConfig, args) -> int:
    checks = run_validation(cfg)
    failed = 0
    with _output(args.out) as fh:
        for name, value, limit, ok in checks:
            if limit is None:
                fh.write(f"INFO  {name}: {value:.6g}\n")
                continue
            failed += not ok
            note = f"limit {limit:.3g}"
            if not ok and math.isfinite(value):
                note += f", exceeded by {value - limit:.3g}"
            fh.write(f"{'PASS' if ok else 'FAIL'}  {name}: {value:.6g} ({note})\n")
        fh.write(f"{len([c for c in checks if c[2] is not None]) - failed} passed, {failed} failed\n")
    return 1 if failed else 0


COMMANDS = {"derive": cmd_derive, "response": cmd_response, "sweep": cmd_sweep,
            "validate": cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="run configuration file")
    common.add_argument("--from-manifest", metavar="PATH",
                        help="repeat a run from its JSON manifest")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--manifest", metavar="PATH",
                        help="where to write the JSON manifest (default: OUT.manifest.json)")
    common.add_argument("--threads", type=int, metavar="N",
                        help="worker threads (default: $HARVEST_THREADS or 1)")

    parser = argparse.ArgumentParser(
        prog="polaron-harvest",
        description="Entanglement harvesting with trapped impurities in a Bose-Einstein condensate.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("derive", parents=[common], help="print derived condensate and detector parameters")
    p_resp = sub.add_parser("response", parents=[common], help="evaluate all observables at one point")
    p_resp.add_argument("--oracle", action="store_true",
                        help="add quadrature values and the largest relative deviation")
    p_sweep = sub.add_parser("sweep", parents=[common], help="scan one parameter")
    p_sweep.add_argument("--preset", choices=("fig2", "fig3", "fig4"))
    p_sweep.add_argument("--plot-data", metavar="PATH", help="also write whitespace-separated columns")
    p_sweep.add_argument("--k-cut-factor", type=float, help="cutoff in units of 1/xi")
    p_val = sub.add_parser("validate", parents=[common], help="run validity and accuracy checks")
    p_val.add_argument("--k-cut-factor", type=float, help="cutoff in units of 1/xi")
    p_val.add_argument("--rel-tol", type=float, help="closed-form vs quadrature tolerance")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.time()
    try:
        cfg = load_config(args)
        status = COMMANDS[args.command](cfg, args)
        _write_manifest(args, cfg, started)
    except (ConfigError, ParameterError, QuadratureError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return status


if __name__ == "__main__":
    sys.exit(main())

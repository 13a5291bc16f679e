"""Command-line entry point: ``hjlab <subcommand> [options]``.

Exit codes: 0 success, 1 solver failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings
from pathlib import Path


from . import thresholds as th
from .audit import (
    BOUND,
    adversarial_ratio_search,
    audit,
    audit_corpus,
    check_identities,
    young_decomposition,
)
from .errors import SolverError
from .expr import ExpressionError, NonPeriodicWarning, parse_source_expression
from .fokker_planck import solve_fp
from .hj import HamiltonianSpec, HJProblem, continuation_solve, solve_hj
from .io import dump_json, read_field, write_csv, write_field, write_field_csv
from .mfg import CouplingSpec, MFGProblem, alpha_sweep, solve_mfg, solve_mfg_hopf_cole
from .torus import norm_report

OUT_ENV = "HJLAB_OUT"

SWEEP_COLUMNS = ["alpha", "converged", "lam", "residual_hj", "residual_fp", "min_m", "max_m", "w22_u", "holder_m", "outer_iters", "error"]
AUDIT_COLUMNS = ["seed", "ratio", "lhs_hessian", "lhs_grad4", "rhs"]


class Run:
    """Collects outputs for one invocation and writes them to the run directory."""

    def __init__(self, args):
        self.args = args
        out = args.out or os.environ.get(OUT_ENV)
        self.out = Path(out) if out else None
        self.files = []
        self.flags = []
        if self.out is not None:
            self.out.mkdir(parents=True, exist_ok=True)
            config = {k: v for k, v in sorted(vars(args).items()) if k != "handler"}
            self.save_json("config.json", config)

    def path(self, name):
        self.files.append(name)
        return self.out / name

    def save_json(self, name, obj):
        if self.out is not None:
            dump_json(obj, self.path(name))

    def save_field(self, stem, field):
        if self.out is not None:
            write_field(self.path(f"{stem}.txt"), field)
            write_field_csv(self.path(f"{stem}.csv"), field)

    def save_csv(self, name, rows, columns):
        if self.out is not None:
            write_csv(self.path(name), rows, columns)

    def finish(self, summary):
        if self.flags:
            summary = dict(summary, flags=self.flags)
        self.save_json("summary.json", summary)
        if self.out is not None:
            manifest = sorted(set(self.files) | {"manifest.json"})
            dump_json({"files": manifest}, self.out / "manifest.json")
        print(dump_json(summary))

    def field(self, expr, n=None, period=None):
        n = self.args.n if n is None else n
        period = self.args.period if period is None else period
        if expr in ("zero", "none"):
            expr = "0"
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NonPeriodicWarning)
            f = parse_source_expression(expr, n, period)
        for w in caught:
            if issubclass(w.category, NonPeriodicWarning):
                self.flags.append(f"non-periodic: {expr}")
        return f


def _hamiltonian(run, args):
    V = None
    if getattr(args, "potential", None) not in (None, "zero", "0"):
        V = run.field(args.potential)
    b0 = None
    if getattr(args, "drift_x", None) or getattr(args, "drift_y", None):
        b0 = (run.field(args.drift_x or "0"), run.field(args.drift_y or "0"))
    return HamiltonianSpec(kappa=args.kappa, gamma=args.gamma, b0=b0, V=V)


def cmd_solve_hj(run, args):
    H = _hamiltonian(run, args)
    f = run.field(args.source)
    problem = HJProblem(H, f)
    if args.continuation > 1:
        sol = continuation_solve(problem, args.continuation, tol=args.tol)
    else:
        sol = solve_hj(problem, tol=args.tol)
    report = audit(sol.u, f - sol.lam)
    bound_checked = H.is_quadratic and H.V is None and args.kappa == 1.0
    summary = {
        "solution": sol.summary(),
        "estimate": report.to_dict(),
        "estimate_bound": BOUND,
        "estimate_bound_applies": bound_checked,
    }
    run.save_field("u", sol.u)
    run.finish(summary)


def cmd_audit(run, args):
    if args.count:
        seeds = list(range(args.seed, args.seed + args.count))
        rows = audit_corpus(args.n, seeds, kmax=args.kmax, radius=args.radius, tol=args.tol)
        run.save_csv("audit.csv", rows, AUDIT_COLUMNS)
        ratios = [r["ratio"] for r in rows]
        summary = {"count": len(rows), "max_ratio": max(ratios), "min_ratio": min(ratios), "bound": BOUND, "rows": rows}
    else:
        f = run.field(args.source)
        sol = solve_hj(HJProblem(HamiltonianSpec(), f), tol=args.tol)
        rep = audit(sol.u, f - sol.lam)
        summary = {"solution": sol.summary(), "estimate": rep.to_dict(), "bound": BOUND}
        run.save_field("u", sol.u)
    run.finish(summary)


def cmd_search(run, args):
    seeds = list(range(args.seed, args.seed + args.seeds))
    res = adversarial_ratio_search(
        n=args.n, seeds=seeds, ascent_iters=args.iters, band=args.band, radius=args.radius, period=args.period
    )
    summary = {
        "best_ratio": res.best_ratio,
        "bound": BOUND,
        "per_seed": res.per_seed,
        "skipped_trials": res.skipped,
        "best_coefficients": res.best_coefficients,
    }
    run.save_field("best_f", res.best_f)
    run.finish(summary)


def cmd_solve_fp(run, args):
    b = (run.field(args.drift_x), run.field(args.drift_y))
    sol = solve_fp(b, tol=args.tol)
    run.save_field("m", sol.m)
    run.finish({"solution": sol.summary()})


def _mfg_problem(run, args):
    H = _hamiltonian(run, args)
    coupling = CouplingSpec(sigma=args.sigma, alpha=args.alpha, mollify_eps=args.mollify)
    return MFGProblem(H, coupling, n=args.n, period=args.period, damping=args.damping, tol=args.tol, max_outer=args.max_outer)


def cmd_solve_mfg(run, args):
    if args.method == "hopf-cole":
        if args.gamma != 2 or args.kappa != 1 or args.drift_x or args.drift_y:
            raise ValueError("hopf-cole requires H = |p|^2 + V")
        V = None if args.potential in ("zero", "0") else run.field(args.potential)
        sol = solve_mfg_hopf_cole(args.alpha, args.sigma, V, tol=min(args.tol, 1e-10), n=args.n, period=args.period)
    else:
        sol = solve_mfg(_mfg_problem(run, args))
    run.save_field("u", sol.u)
    run.save_field("m", sol.m)
    run.finish({"solution": sol.summary(), "method": args.method})


def cmd_sweep(run, args):
    alphas = [float(a) for a in args.alphas.split(",")]
    rows = alpha_sweep(_mfg_problem(run, args), alphas)
    dict_rows = [vars(r) for r in rows]
    run.save_csv("sweep.csv", dict_rows, SWEEP_COLUMNS)
    run.finish({"rows": dict_rows, "all_converged": all(r.converged for r in rows)})
    if not all(r.converged for r in rows):
        return 1
    return 0


def cmd_thresholds(run, args):
    if args.gamma_grid or args.alpha_grid:
        gammas = [float(g) for g in (args.gamma_grid or str(args.gamma)).split(",")]
        alphas = [float(a) for a in (args.alpha_grid or str(args.alpha)).split(",")]
        table = th.regime_table(args.n, gammas, alphas, args.regime, args.small_data, args.improved)
        text = th.table_to_csv(args.n, gammas, alphas, table, args.regime)
        if run.out is not None:
            run.path("thresholds.csv").write_text(text)
        cells = [
            dict(gamma=g, alpha=a, **v.to_dict())
            for g, row in zip(gammas, table)
            for a, v in zip(alphas, row)
        ]
        run.finish({"regime": args.regime, "n": args.n, "cells": cells})
        return 0
    q = th.RegimeQuery(args.n, args.gamma, args.alpha, args.regime, args.small_data, args.improved)
    verdict = th.evaluate(q)
    run.finish({"query": {"n": q.n, "gamma": q.gamma, "gamma_conj": q.gamma_conj, "alpha": q.alpha, "regime": q.regime}, "verdict": verdict.to_dict()})
    return 0


def cmd_identities(run, args):
    u = run.field(args.field)
    squares, young = young_decomposition(u, args.c_f)
    run.finish({"residuals": check_identities(u), "young_decomposition": {"c_f": args.c_f, "squares": squares, "young": young}})


def cmd_report(run, args):
    f = read_field(args.file) if args.file else run.field(args.field)
    exps = [float(q) for q in args.q.split(",")] if args.q else []
    rep = norm_report(f, exponents=[1, 2, 4, *exps], pairs=args.pairs, seed=args.seed)
    run.finish({"n": f.n, "period": f.period, "lp": rep.lp, "w22": rep.w22, "holder": rep.holder})


def _grid_args(p, n_default=64):
    p.add_argument("--n", type=int, default=n_default, help="grid points per axis (power of two)")
    p.add_argument("--period", type=float, default=1.0)


def _hamiltonian_args(p):
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--potential", default="zero", help="V(x, y) expression inside H")
    p.add_argument("--drift-x", default=None)
    p.add_argument("--drift-y", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hjlab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV})")
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(handler=handler)
        return p

    p = add("solve-hj", cmd_solve_hj, "solve the ergodic HJ equation and audit the estimate")
    _grid_args(p)
    _hamiltonian_args(p)
    p.add_argument("--source", default="0")
    p.add_argument("--continuation", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-9)

    p = add("audit", cmd_audit, "audit the W22 estimate for one source or a random corpus")
    _grid_args(p, 128)
    p.add_argument("--source", default="cos(2*pi*x)")
    p.add_argument("--count", type=int, default=0, help="random corpus size (overrides --source)")
    p.add_argument("--kmax", type=float, default=6)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-9)

    p = add("search-worst", cmd_search, "projected gradient ascent of the estimate ratio")
    _grid_args(p)
    p.add_argument("--seeds", type=int, default=8)
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--band", type=int, default=4)
    p.add_argument("--radius", type=float, default=1.0)

    p = add("solve-fp", cmd_solve_fp, "stationary Fokker-Planck with a given drift")
    _grid_args(p)
    p.add_argument("--drift-x", default="0")
    p.add_argument("--drift-y", default="0")
    p.add_argument("--tol", type=float, default=1e-9)

    for name, handler, text in (
        ("solve-mfg", cmd_solve_mfg, "stationary MFG with coupling sigma m^alpha"),
        ("sweep-alpha", cmd_sweep, "warm-started sweep over alpha"),
    ):
        p = add(name, handler, text)
        _grid_args(p)
        _hamiltonian_args(p)
        p.add_argument("--sigma", type=float, default=1.0)
        p.add_argument("--damping", type=float, default=1.0)
        p.add_argument("--mollify", type=float, default=0.0)
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--max-outer", type=int, default=500)
        if name == "solve-mfg":
            p.add_argument("--alpha", type=float, default=1.0)
            p.add_argument("--method", choices=("picard", "hopf-cole"), default="picard")
        else:
            p.add_argument("--alphas", default="0.5,1,2,4,8")
            p.set_defaults(alpha=1.0)

    p = add("thresholds", cmd_thresholds, "closed-form smoothness thresholds")
    p.add_argument("--n", type=int, required=True, help="space dimension")
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--regime", choices=th.REGIMES, default="stationary-defocusing")
    p.add_argument("--small-data", action="store_true")
    p.add_argument("--improved", action="store_true", help="use the improved superquadratic parabolic bound")
    p.add_argument("--gamma-grid", default=None)
    p.add_argument("--alpha-grid", default=None)

    p = add("identities", cmd_identities, "integration-by-parts identity residuals for a field")
    _grid_args(p)
    p.add_argument("--field", default="sin(2*pi*x)*sin(2*pi*y)")
    p.add_argument("--c-f", type=float, default=BOUND)

    p = add("report", cmd_report, "norm report for a field expression or field file")
    _grid_args(p)
    p.add_argument("--field", default="0")
    p.add_argument("--file", default=None)
    p.add_argument("--q", default=None, help="extra comma-separated L^q exponents")
    p.add_argument("--pairs", type=int, default=100_000)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        r = Run(args)
        code = args.handler(r, args)
        return int(code or 0)
    except (ExpressionError, ValueError) as exc:
        print(f"hjlab: error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"hjlab: solver failure: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

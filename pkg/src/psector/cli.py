"""Command-line front end.

Subcommands: exponent (k and derivatives, table mode), profile (CSV table),
measure (solve + slope fit + certificates), verify (acceptance suites).

Exit codes: 0 success, 1 verification failure, 2 usage or domain error,
3 internal invariant failure, 4 solver non-convergence.  Numeric stdout uses
10 significant digits; CSV/JSON files carry full shortest-round-trip floats.
A config file of key = value lines supplies defaults; flags override it.
The output directory resolves from --out-dir, then $PSECTOR_OUTDIR, then cwd.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, fields

from .exponent import (
    DomainError,
    dk_dnu,
    dk_dp,
    radial_exponent,
    radial_exponent_roots,
)
from .profile import ProfileInvariantError

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_INVARIANT = 3
EXIT_NO_CONVERGENCE = 4

_CONFIG_KEYS = {
    "n_r": int,
    "n_phi": int,
    "samples": int,
    "tol": float,
    "eps_reg": float,
    "max_iter": int,
    "seed": int,
    "out_dir": str,
}


@dataclass
class CliConfig:
    n_r: int = 256
    n_phi: int = 256
    samples: int = 129
    tol: float = 1e-8
    eps_reg: float = 1e-6
    max_iter: int = 4000
    seed: int = 0
    out_dir: str = "."

    @classmethod
    def from_file(cls, path) -> "CliConfig":
        cfg = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                key, sep, val = line.partition("=")
                key, val = key.strip(), val.strip().strip("\"'")
                if not sep:
                    raise DomainError(f"{path}:{lineno}: expected key = value")
                if key not in _CONFIG_KEYS:
                    raise DomainError(f"{path}:{lineno}: unknown config key {key!r}")
                setattr(cfg, key, _CONFIG_KEYS[key](val))
        return cfg

    def apply_args(self, args) -> "CliConfig":
        for f in fields(self):
            v = getattr(args, f.name, None)
            if v is not None:
                setattr(self, f.name, v)
        return self


def _parse_p(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity", "oo"):
        return math.inf
    return float(t)


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _resolve_outdir(cfg: CliConfig, args) -> str:
    if getattr(args, "out_dir", None):
        return args.out_dir
    env = os.environ.get("PSECTOR_OUTDIR")
    if env:
        return env
    return cfg.out_dir


def _load_config(args) -> CliConfig:
    cfg = CliConfig.from_file(args.config) if getattr(args, "config", None) else CliConfig()
    return cfg.apply_args(args)


def cmd_exponent(args) -> int:
    cfg = _load_config(args)
    if not args.table and (args.nu is None or args.p is None):
        print("error: --nu and --p are required unless --table is given", file=sys.stderr)
        return EXIT_USAGE
    if args.table:
        from .experiments import run_exponent_table

        rep = run_exponent_table()
        out_dir = _resolve_outdir(cfg, args)
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "exponent_table.csv")
        rep.write_csv(path)
        rep.write_json(os.path.join(out_dir, "exponent_table.json"))
        print(f"wrote {path}")
        return EXIT_OK if rep.passed else EXIT_VERIFY_FAIL
    nu, p = args.nu, args.p
    k = radial_exponent(nu, p)
    print(f"k = {_fmt(k)}")
    if args.derivs:
        print(f"dk/dnu = {_fmt(dk_dnu(nu, p))}")
        if p != math.inf:
            print(f"dk/dp = {_fmt(dk_dp(nu, p))}")
    if args.roots:
        k1, k2 = radial_exponent_roots(nu, p)
        print(f"k1 = {_fmt(k1)}")
        print(f"k2 = {_fmt(k2)}")
    return EXIT_OK


def cmd_profile(args) -> int:
    cfg = _load_config(args)
    from .profile import build_profile, write_profile_csv

    prof = build_profile(args.nu, args.p, cfg.samples)
    out_dir = _resolve_outdir(cfg, args)
    os.makedirs(out_dir, exist_ok=True)
    p_label = "inf" if args.p == math.inf else f"{args.p:g}"
    name = args.out or f"profile_{args.nu:g}_{p_label}.csv"
    path = os.path.join(out_dir, name)
    write_profile_csv(prof, path)
    print(f"case = {prof.case}")
    print(f"k = {_fmt(prof.k)}")
    print(f"boundary_residual = {_fmt(prof.boundary_residual)}")
    print(f"band_inner_min_f = {_fmt(prof.band_inner_min_f)}")
    print(f"band_outer_min_fprime = {_fmt(prof.band_outer_min_fprime)}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_measure(args) -> int:
    cfg = _load_config(args)
    from .experiments import run_measure_experiment
    from .measure import (
        INNER_ARC,
        MeasureProblem,
        comparability_constants,
        fit_slope,
        solve_measure,
        write_summary_json,
    )

    out_dir = _resolve_outdir(cfg, args)
    os.makedirs(out_dir, exist_ok=True)
    stem = f"measure_{args.nu:g}_{args.p:g}" + ("_inner" if args.inner_arc else "")
    problem = MeasureProblem(
        nu=args.nu, p=args.p, R=args.R, n_r=cfg.n_r, n_phi=cfg.n_phi,
        eps_reg=cfg.eps_reg, tol=cfg.tol, max_iter=cfg.max_iter,
        arc_target=INNER_ARC if args.inner_arc else "full_arc",
    )
    sol = solve_measure(problem)
    k = radial_exponent(args.nu, args.p)
    window = (0.05 * args.R, 0.4 * args.R)
    fit = fit_slope(sol, 0.0, window)
    lo, hi = comparability_constants(sol, k, "S_2nu")
    extra = {
        "k": k,
        "slope": fit.exponent,
        "slope_window": list(window),
        "slope_rms": fit.rms,
        "ratio_min": lo,
        "ratio_max": hi,
    }
    if args.mc_check:
        rep = run_measure_experiment(
            args.nu, args.p, n_r=cfg.n_r, n_phi=cfg.n_phi, eps_reg=cfg.eps_reg,
            mc_check=True, seed=cfg.seed,
        )
        extra["mc_agreement"] = [r for r in rep.rows if "mc" in r]
        extra["mc_within_3_sigma"] = all(
            c["passed"] for c in rep.criteria if "walk" in c["name"]
        )
    sol.to_csv(os.path.join(out_dir, stem + ".csv"))
    write_summary_json(sol, os.path.join(out_dir, stem + ".json"), extra)
    print(f"k = {_fmt(k)}")
    print(f"slope = {_fmt(fit.exponent)}")
    print(f"ratio_min = {_fmt(lo)}")
    print(f"ratio_max = {_fmt(hi)}")
    print(f"converged = {sol.converged}")
    print(f"wrote {os.path.join(out_dir, stem + '.csv')}")
    if not sol.converged:
        print(
            f"solver did not reach tol {problem.tol:g} in {problem.max_iter} cycles",
            file=sys.stderr,
        )
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


SUITES = ("exponent", "profile", "pde", "measure", "stream", "phragmen", "all")


def cmd_verify(args) -> int:
    cfg = _load_config(args)
    if args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}",
              file=sys.stderr)
        return EXIT_USAGE
    from .verify import run_suites

    out_dir = _resolve_outdir(cfg, args)
    os.makedirs(out_dir, exist_ok=True)
    reports = run_suites(args.suite, quick=args.quick, out_dir=out_dir, seed=cfg.seed)
    failed = []
    for rep in reports:
        status = "PASS" if rep.passed else "FAIL"
        print(f"[{status}] {rep.experiment_id}")
        if not rep.passed:
            failed.append(rep)
    if failed:
        first = failed[0].first_failure()
        print(
            f"FAILED: {failed[0].experiment_id}: {first['name']} ({first['detail']})",
            file=sys.stderr,
        )
        return EXIT_VERIFY_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="psector",
        description="p-harmonic functions and p-harmonic measure in planar sectors",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--out-dir", dest="out_dir", help="output directory")

    sp = sub.add_parser("exponent", help="radial exponent k(nu, p)")
    sp.add_argument("--nu", type=float, required=False)
    sp.add_argument("--p", type=_parse_p, required=False)
    sp.add_argument("--derivs", action="store_true", help="print dk/dnu and dk/dp")
    sp.add_argument("--roots", action="store_true", help="print both algebraic roots")
    sp.add_argument("--table", action="store_true", help="write the exponent table CSV")
    common(sp)
    sp.set_defaults(func=cmd_exponent)

    sp = sub.add_parser("profile", help="angular profile CSV")
    sp.add_argument("--nu", type=float, required=True)
    sp.add_argument("--p", type=_parse_p, required=True)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--out", help="output file name")
    common(sp)
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("measure", help="p-harmonic measure solve")
    sp.add_argument("--nu", type=float, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--R", type=float, default=1.0)
    sp.add_argument("--n-r", dest="n_r", type=int)
    sp.add_argument("--n-phi", dest="n_phi", type=int)
    sp.add_argument("--eps-reg", dest="eps_reg", type=float)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--inner-arc", action="store_true",
                    help="prescribe data on the inner sub-arc variant")
    sp.add_argument("--mc-check", action="store_true",
                    help="add the walk-on-spheres agreement block (p = 2)")
    common(sp)
    sp.set_defaults(func=cmd_measure)

    sp = sub.add_parser("verify", help="run acceptance suites")
    sp.add_argument("suite", help=f"one of: {', '.join(SUITES)}")
    sp.add_argument("--quick", action="store_true", help="reduced grids")
    sp.add_argument("--seed", type=int)
    common(sp)
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ProfileInvariantError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())

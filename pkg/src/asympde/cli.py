"""Command-line experiments.

    asympde exponents      [--n-max N]
    asympde residual-order --n 1 --eps 1e-2,1e-3,1e-4,1e-5 --out report.json
    asympde fold-profile   --tau=-5,-10,-20 [--tanh] --out fold.csv
    asympde tanh-check     --tau 10,20,40 --out tanh.csv
    asympde initial-layer  --mu 0.2,0.1,0.05 --out layer.csv
    asympde oracle-run     --initial shock --eps 0.05 --out field.csv

Every subcommand accepts --config FILE (JSON object of option defaults);
explicit flags override it.  ASYMPDE_THREADS sets the worker count for
parallel eps sweeps.  Exit codes: 0 success, 1 acceptance failure, 2 usage
or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import oracle
from .colehopf import scaling_exponents, w10
from .flux import FluxModel
from .fold import FoldQuery, fold_root
from .initial_layer import (
    InitialLayerProblem,
    composite_solution,
    renormalized_solution,
    tanh_step,
)
from .verify import OMEGA_EPS, RegionSpec, ResidualReport, fit_order, residual_ratio

log = logging.getLogger("asympde")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _threads() -> int:
    raw = os.environ.get("ASYMPDE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"ASYMPDE_THREADS must be an integer, got {raw!r}")


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


# --- subcommands -----------------------------------------------------------

def cmd_exponents(args) -> int:
    fh, close = _open_out(args.out)
    w = csv.writer(fh)
    w.writerow(["n", "sigma", "mu", "kappa", "sigma_float", "mu_float", "kappa_float", "balance_ok"])
    for n in range(1, args.n_max + 1):
        e = scaling_exponents(n)
        w.writerow([n, e.sigma, e.mu, e.kappa, float(e.sigma), float(e.mu), float(e.kappa),
                    int(e.balance_ok())])
    if close:
        fh.close()
    return EXIT_OK


def cmd_residual_order(args) -> int:
    if args.n < 1:
        raise ConfigError("--n must be >= 1")
    if len(args.eps) < 3 or any(e <= 0.0 for e in args.eps):
        raise ConfigError("--eps needs at least three positive values")
    flux = FluxModel.from_name(args.flux)
    dexp = None if args.domain_exponent is None else Fraction(args.domain_exponent)
    region = RegionSpec(OMEGA_EPS, K=args.K, domain_exponent=dexp, n=args.n)
    eps_sorted = sorted(set(args.eps), reverse=True)

    def one(e):
        return residual_ratio(args.n, flux, e, region, samples=args.samples, seed=args.seed)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        ratios = list(pool.map(one, eps_sorted))
    entries = list(zip(eps_sorted, ratios))
    near_zero = all(r <= 1e-9 for r in ratios)
    if all(r > 0.0 for r in ratios):
        slope, r2 = fit_order(entries)
    else:
        slope, r2 = float("nan"), float("nan")
    report = ResidualReport(
        n=args.n, flux_id=flux.name, entries=entries, fitted_order=slope,
        predicted_order=scaling_exponents(args.n).kappa, r_squared=r2,
        meta={
            "sup_convention": "numerator and denominator sup taken separately over Omega_eps",
            "K": args.K,
            "domain_exponent": str(region.x_exponent),
            "samples": args.samples,
            "seed": args.seed,
            "near_zero_residuals": near_zero,
            "band_half_width": args.band,
            "r2_min": args.r2_min,
        },
    )
    ok = report.within_band(args.band, args.r2_min)
    report.meta["within_band"] = ok
    text = report.to_json() + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    log.info("fitted order %.4f (predicted %s), r2 %.5f", slope, report.predicted_order, r2)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_fold_profile(args) -> int:
    if args.phi2 <= 0.0:
        raise ConfigError("--phi2 must be positive")
    fh, close = _open_out(args.out)
    w = csv.writer(fh)
    header = ["xi", "tau", "w10", "H_over_phi2", "difference"]
    if args.tanh:
        header += ["z", "tanh_profile", "tanh_difference"]
    w.writerow(header)
    for tau in args.tau:
        if args.tanh:
            if tau <= 0.0:
                raise ConfigError("tanh comparison needs tau > 0")
            z = np.linspace(args.z_min, args.z_max, args.points)
            xi = 2.0 * z / np.sqrt(tau)
        else:
            xi = np.linspace(args.xi_min, args.xi_max, args.points)
            z = None
        wv = np.atleast_1d(w10(xi, tau, args.phi2))
        for i, x in enumerate(xi):
            H = fold_root(FoldQuery(float(x), float(tau), 1)).root / args.phi2
            row = [repr(float(x)), repr(float(tau)), repr(float(wv[i])), repr(H), repr(float(wv[i] - H))]
            if args.tanh:
                prof = -np.sqrt(tau) * np.tanh(z[i]) / args.phi2
                row += [repr(float(z[i])), repr(float(prof)), repr(float(wv[i] - prof))]
            w.writerow(row)
    if close:
        fh.close()
    return EXIT_OK


def run_initial_layer(mu: float, eps: float, theta_max: float, nt: int, window: float,
                      max_points: int = 150, nu_minus: float = 1.0, nu_plus: float = -1.0,
                      refine: int = 1, formulas: bool = True):
    """Oracle run plus both asymptotic formulas for one mu; returns a dict of arrays.

    The mesh spacing is rho/(10 refine) in the initial layer and eps/(40 refine)
    elsewhere.  Compared points are mesh nodes, so no interpolation enters.
    """
    nu, nup = tanh_step(nu_minus, nu_plus)
    rho = mu * eps
    prob = InitialLayerProblem(nu, nu_minus, nu_plus, rho, eps, FluxModel.burgers(), nu_prime=nup)
    vmax = max(abs(nu_minus), abs(nu_plus))
    L = (40.0 + 4.0 * vmax * theta_max) * eps
    nodes = oracle.graded_nodes(-L, L, rho / 10.0, eps / 40.0, 0.0, 5.0 * rho, 1.1)
    for _ in range(int(math.log2(refine))):
        nodes = _bisect(nodes)
    grid = oracle.GridSpec(-L, L, nodes.size, 0.0, theta_max * eps, nt, nodes=nodes)
    # the layer spreads self-similarly, so the step ratio (not dt) sets the error early on
    fld = oracle.solve(prob.flux, prob.initial, eps, grid, substeps=4 * refine,
                       dt_first=1e-3 * rho**2 / eps / refine, growth=1.02, startup_steps=4)
    sel = np.nonzero(np.abs(fld.x) <= window * eps)[0]
    sel = sel[:: max(1, sel.size // max_points)]
    X, T = np.meshgrid(fld.x[sel], fld.t)
    out = {"x": X, "t": T, "oracle": fld.values[:, sel], "rho": rho, "field": fld}
    if formulas:
        out["composite"] = composite_solution(X, T, prob)
        ren = np.empty_like(out["composite"])
        ren[0] = prob.initial(X[0])
        ren[1:] = renormalized_solution(X[1:], T[1:], prob)
        out["renormalized"] = ren
    return out


def _bisect(x):
    out = np.empty(2 * x.size - 1)
    out[::2] = x
    out[1::2] = 0.5 * (x[1:] + x[:-1])
    return out


def cmd_initial_layer(args) -> int:
    if args.nu_minus == args.nu_plus:
        raise ConfigError("degenerate initial data: nu_minus == nu_plus (no initial gradient)")
    if args.nu_minus < args.nu_plus:
        raise ConfigError("need nu_minus > nu_plus")
    if any(not 0.0 < m < 1.0 for m in args.mu):
        raise ConfigError("--mu values must lie in (0, 1)")
    if args.eps <= 0.0 or args.theta_max <= 0.0:
        raise ConfigError("--eps and --theta-max must be positive")
    if args.refine < 1 or args.refine & (args.refine - 1):
        raise ConfigError("--refine must be a power of two")
    fh, close = _open_out(args.out)
    w = csv.writer(fh)
    if args.table == "summary":
        w.writerow(["mu", "rho", "eps", "sup_err_composite", "sup_err_renormalized"])
    else:
        w.writerow(["mu", "x", "t", "oracle", "composite", "renormalized"])
    for mu in args.mu:
        r = run_initial_layer(mu, args.eps, args.theta_max, args.nt, args.window,
                              nu_minus=args.nu_minus, nu_plus=args.nu_plus, refine=args.refine)
        if args.table == "summary":
            ec = np.max(np.abs(r["composite"] - r["oracle"]))
            er = np.max(np.abs(r["renormalized"] - r["oracle"]))
            w.writerow([repr(mu), repr(r["rho"]), repr(args.eps), repr(float(ec)), repr(float(er))])
        else:
            for k in range(r["x"].shape[0]):
                for i in range(r["x"].shape[1]):
                    w.writerow([repr(mu), repr(float(r["x"][k, i])), repr(float(r["t"][k, i])),
                                repr(float(r["oracle"][k, i])), repr(float(r["composite"][k, i])),
                                repr(float(r["renormalized"][k, i]))])
    if close:
        fh.close()
    return EXIT_OK


def cmd_oracle_run(args) -> int:
    flux = FluxModel.from_name(args.flux)
    eps = args.eps
    if eps <= 0.0:
        raise ConfigError("--eps must be positive")
    if args.initial == "shock":
        def q(x):
            return -np.tanh(np.asarray(x) / (2.0 * eps))
    elif args.initial == "tanh-step":
        rho = args.rho
        def q(x):
            return -np.tanh(np.asarray(x) / rho)
    elif args.initial == "constant":
        def q(x):
            return np.full(np.shape(x), args.value)
    else:
        raise ConfigError(f"unknown initial data {args.initial!r}")
    if args.out in (None, "-"):
        raise ConfigError("--out is required for oracle-run")
    grid = oracle.GridSpec(args.x_min, args.x_max, args.nx, args.t0, args.t_end, args.nt)
    fld = oracle.solve(flux, q, eps, grid, substeps=args.substeps)
    if args.format == "csv":
        oracle.write_csv(fld, args.out)
    else:
        oracle.write_binary(fld, args.out)
    return EXIT_OK


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="asympde", description=__doc__.split("\n")[0],
                                formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    def common(sp):
        sp.add_argument("--config", default=None, help="JSON file of option defaults")
        sp.add_argument("--out", default=None, help="output path; stdout when omitted or '-'")

    sp = sub.add_parser("exponents", help="table of (sigma, mu, kappa)", formatter_class=fmt)
    common(sp)
    sp.add_argument("--n-max", type=int, default=10, help='largest n in the table')
    sp.set_defaults(func=cmd_exponents)

    sp = sub.add_parser("residual-order", help="fit the order of the normalised residual", formatter_class=fmt)
    common(sp)
    sp.add_argument("--n", type=int, default=1, help='singularity index n (A_{2n+1})')
    sp.add_argument("--flux", default="cubic", help="cubic (u^2/2+u^3/6) or quadratic")
    sp.add_argument("--eps", type=_floats, default=[1e-2, 1e-3, 1e-4, 1e-5], help='comma-separated eps values')
    sp.add_argument("--samples", type=int, default=10_000, help='Sobol points per eps')
    sp.add_argument("--seed", type=int, default=0, help='Sobol scrambling seed')
    sp.add_argument("--K", type=float, default=1.0, help='size of Omega_eps')
    sp.add_argument("--domain-exponent", default=None, help="x-scaling power in Omega_eps; kappa when omitted")
    sp.add_argument("--band", type=float, default=0.1, help="accepted |fitted - kappa|")
    sp.add_argument("--r2-min", type=float, default=0.95, help='minimum r^2 of the fit')
    sp.set_defaults(func=cmd_residual_order)

    for name, tanh in (("fold-profile", False), ("tanh-check", True)):
        sp = sub.add_parser(name, help="w10 against the fold root (and tanh profile)", formatter_class=fmt)
        common(sp)
        sp.add_argument("--tau", type=_floats, default=[10.0, 20.0, 40.0] if tanh else [-5.0, -10.0, -20.0], help='comma-separated tau values (use --tau=-5,-10 for negatives)')
        sp.add_argument("--xi-min", type=float, default=-3.0, help='xi range start')
        sp.add_argument("--xi-max", type=float, default=3.0, help='xi range end')
        sp.add_argument("--z-min", type=float, default=-3.0, help='z range start (tanh table, xi = 2z/sqrt(tau))')
        sp.add_argument("--z-max", type=float, default=3.0, help='z range end')
        sp.add_argument("--points", type=int, default=61, help='rows per tau')
        sp.add_argument("--phi2", type=float, default=1.0, help="phi''(0)")
        sp.add_argument("--tanh", action="store_true", default=tanh, help="add the tanh-profile columns")
        sp.set_defaults(func=cmd_fold_profile)

    sp = sub.add_parser("initial-layer", help="composite/renormalised formulas against the oracle",
                        formatter_class=fmt)
    common(sp)
    sp.add_argument("--mu", type=_floats, default=[0.2, 0.1, 0.05], help='comma-separated rho/eps ratios')
    sp.add_argument("--eps", type=float, default=0.01, help='viscosity')
    sp.add_argument("--theta-max", type=float, default=5.0, help='final time in units of eps')
    sp.add_argument("--nt", type=int, default=101, help='output time slices')
    sp.add_argument("--window", type=float, default=12.0, help="compare on |x| <= window*eps")
    sp.add_argument("--nu-minus", type=float, default=1.0, help='left limit of nu')
    sp.add_argument("--nu-plus", type=float, default=-1.0, help='right limit of nu')
    sp.add_argument("--table", choices=["summary", "field"], default="summary", help='one row per mu, or every compared point')
    sp.add_argument("--refine", type=int, default=2, help="mesh and step refinement, a power of two")
    sp.set_defaults(func=cmd_initial_layer)

    sp = sub.add_parser("oracle-run", help="finite-difference reference solve", formatter_class=fmt)
    common(sp)
    sp.add_argument("--flux", default="burgers", help='burgers, quadratic or cubic')
    sp.add_argument("--initial", choices=["shock", "tanh-step", "constant"], default="shock", help='initial data family')
    sp.add_argument("--eps", type=float, default=0.05, help='viscosity')
    sp.add_argument("--rho", type=float, default=0.01, help='tanh-step width')
    sp.add_argument("--value", type=float, default=0.0, help='constant initial value')
    sp.add_argument("--x-min", type=float, default=-2.0, help='left boundary')
    sp.add_argument("--x-max", type=float, default=2.0, help='right boundary')
    sp.add_argument("--nx", type=int, default=401, help='grid nodes')
    sp.add_argument("--t0", type=float, default=0.0, help='start time')
    sp.add_argument("--t-end", type=float, default=1.0, help='end time')
    sp.add_argument("--nt", type=int, default=11, help='output time slices')
    sp.add_argument("--substeps", type=int, default=4, help='time steps per output interval')
    sp.add_argument("--format", choices=["csv", "bin"], default="csv", help='snapshot format')
    sp.set_defaults(func=cmd_oracle_run)
    return p


def _load_config(argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return {}
    try:
        with open(known.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {known.config!r}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    out = {}
    for k, v in cfg.items():
        out[k.replace("-", "_")] = v
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        cfg = _load_config(argv)
    except ConfigError as exc:
        print(f"asympde: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg:
        # config values become defaults of the chosen subcommand; flags still win
        sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
        for sp in sub_action.choices.values():
            sp.set_defaults(**{k: v for k, v in cfg.items() if k not in ("func", "command")})
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"asympde: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

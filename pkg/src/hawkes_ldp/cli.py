"""hawkes-ldp: rate functions, optimal paths, application exponents and simulation.

Every subcommand writes a headered CSV (``-o`` path, stdout by default).
Exit status: 0 success, 2 usage error, 3 numerical failure.

Sweep arguments accept a single value or ``start:stop:count``.  Any option
may also come from ``--config FILE``, a flat ``key = value`` file whose keys
are option names; flags on the command line win.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import applications as app
from . import regimes as rg
from ._csv import write_csv
from .errors import BlowUpError, ConvergenceError
from .mgf import DEFAULT_TOL, log_mgf_N, log_mgf_Z
from .params import HawkesParams
from .rates import optimal_path_N, optimal_path_Z, rate_H, rate_J
from .simulation import SimSpec, mc_log_mgf_N, mc_log_mgf_Z, simulate

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
NUMERIC_ERRORS = (ConvergenceError, BlowUpError, ArithmeticError)
Z_LIMIT = 4.0


class UsageError(Exception):
    pass


def grid(text):
    """``"3"`` -> [3.0]; ``"0.5:6:12"`` -> 12 evenly spaced points."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) == 3:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1:
                raise ValueError
            return np.linspace(lo, hi, n).tolist()
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected a number or start:stop:count, got {text!r}")


def float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common(p, seed=False, trials=False):
    p.add_argument("--alpha", type=float, default=1.0, help="jump size of Z")
    p.add_argument("--beta", type=float, default=1.0, help="decay rate of Z")
    p.add_argument("--mu", type=float, default=0.0, help="base intensity")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="ODE tolerance")
    p.add_argument("-o", "--output", default="-", help="output CSV path, - for stdout")
    p.add_argument("--config", default=None, help="flat key = value file of defaults")
    if seed:
        p.add_argument("--seed", type=int, default=42, help="master RNG seed")
    if trials:
        p.add_argument("--trials", type=int, default=100_000, help="Monte Carlo replications")


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="hawkes-ldp", description=__doc__.splitlines()[0],
                                     formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("rate", help="J or H sweep over x", formatter_class=fmt)
    _common(p)
    p.add_argument("--kind", choices=["z", "n"], default="z")
    p.add_argument("--T", type=float, default=5.0, help="horizon")
    p.add_argument("--x", type=grid, default=grid("0.5:6:56"), help="value or start:stop:count")

    p = sub.add_parser("path", help="most likely path reaching x at T", formatter_class=fmt)
    _common(p)
    p.add_argument("--kind", choices=["z", "n"], default="z")
    p.add_argument("--T", type=float, default=5.0)
    p.add_argument("--x", type=float, default=3.0)
    p.add_argument("--grid-size", type=int, default=2048)

    p = sub.add_parser("ruin", help="ruin exponent I_tau sweep", formatter_class=fmt)
    _common(p)
    p.add_argument("--x", type=grid, default=grid("0.5"), help="scaled initial surplus")
    p.add_argument("--T", type=grid, default=grid("0.05:0.5:10"), help="horizon")
    p.add_argument("--claims", choices=[k.value for k in app.ClaimKind], default="poisson")
    p.add_argument("--claim-param", type=float, default=1.0,
                   help="Poisson rate, deterministic size or exponential mean")

    p = sub.add_parser("queue", help="queue loss exponent G sweep", formatter_class=fmt)
    _common(p)
    p.add_argument("--x", type=grid, default=grid("1.5:8:27"), help="scaled server count")
    p.add_argument("--T", type=grid, default=grid("5"), help="horizon")
    p.add_argument("--c", type=float, default=1.0, help="service time")

    p = sub.add_parser("simulate", help="event times of one trajectory", formatter_class=fmt)
    _common(p, seed=True)
    p.add_argument("--z0", type=float, default=1.0)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--trial", type=int, default=0, help="trajectory index within the seed")

    p = sub.add_parser("validate", help="Monte Carlo vs ODE log-MGFs", formatter_class=fmt)
    _common(p, seed=True, trials=True)
    p.add_argument("--z0", type=float, default=1.0)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--theta", type=float_list, default=float_list("0,0.1,0.2"),
                   help="comma-separated theta values")
    p.add_argument("--which", choices=["z", "n", "both"], default="both")

    p = sub.add_parser("regime", help="closed-form curves for the parameter regime",
                       formatter_class=fmt)
    _common(p)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--x", type=grid, default=grid("0:4:41"))
    p.add_argument("--theta-samples", type=int, default=41)

    p = sub.add_parser("figures", help="write all figure datasets", formatter_class=fmt)
    _common(p)
    p.add_argument("--outdir", default="figures", help="directory for the CSV files")
    p.add_argument("--points", type=int, default=40, help="points per curve")
    return parser


def read_config(path):
    """``key = value`` lines to argv tokens; ``#`` starts a comment."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if not key or key == "config":
                raise UsageError(f"{path}:{n}: bad key {key!r}")
            out += ["--" + key.replace("_", "-"), value]
    return out


def _with_config(argv):
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None or not argv:
        return argv
    # config tokens go right after the subcommand so explicit flags override them
    return argv[:1] + read_config(path) + argv[1:]


def _params(args):
    try:
        return HawkesParams(args.alpha, args.beta, args.mu)
    except ValueError as exc:
        raise UsageError(str(exc))


def _positive(**kw):
    for name, v in kw.items():
        if not (v > 0 and math.isfinite(v)):
            raise UsageError(f"--{name} must be finite and > 0, got {v}")


# ---------------------------------------------------------------- commands

def cmd_rate(args):
    params = _params(args)
    _positive(T=args.T)
    fn = rate_J if args.kind == "z" else rate_H
    rows, failed = [], False
    for x in args.x:
        try:
            r = fn(params, x, args.T, args.tol)
            rows.append((x, r.value, r.theta_star, r.boundary.value))
        except NUMERIC_ERRORS as exc:
            failed = True
            rows.append((x, math.nan, None, f"failed: {exc}"))
    write_csv(args.output, ["x", "rate", "theta_star", "boundary"], rows)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_path(args):
    params = _params(args)
    _positive(T=args.T)
    if args.grid_size < 2:
        raise UsageError("--grid-size must be >= 2")
    fn = optimal_path_Z if args.kind == "z" else optimal_path_N
    try:
        path = fn(params, args.x, args.T, args.grid_size, args.tol)
    except (ValueError, *NUMERIC_ERRORS) as exc:
        print(f"hawkes-ldp path: no interior optimal path for x={args.x}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    path.to_csv(args.output)
    return EXIT_OK


def _sweep_axis(args):
    if len(args.x) > 1 and len(args.T) > 1:
        raise UsageError("sweep either --x or --T, not both")
    if len(args.T) > 1:
        return "T", [(args.x[0], T) for T in args.T]
    return "x", [(x, args.T[0]) for x in args.x]


def cmd_ruin(args):
    params = _params(args)
    try:
        claims = app.ClaimModel(args.claims, args.claim_param)
    except ValueError as exc:
        raise UsageError(str(exc))
    axis, pts = _sweep_axis(args)
    rows, failed = [], False
    for x, T in pts:
        _positive(x=x, T=T)
        try:
            v = app.ruin_exponent(params, app.RuinSpec(x, T, claims), args.tol).value
        except NUMERIC_ERRORS as exc:
            failed = True
            print(f"hawkes-ldp ruin: x={x} T={T}: {exc}", file=sys.stderr)
            v = math.nan
        rows.append((T if axis == "T" else x, v))
    write_csv(args.output, [axis, "I_tau"], rows)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_queue(args):
    params = _params(args)
    _positive(c=args.c)
    axis, pts = _sweep_axis(args)
    rows, failed = [], False
    for x, T in pts:
        _positive(x=x, T=T)
        try:
            v = app.queue_loss_exponent(params, x, T, args.c, args.tol).value
        except NUMERIC_ERRORS as exc:
            failed = True
            print(f"hawkes-ldp queue: x={x} T={T}: {exc}", file=sys.stderr)
            v = math.nan
        rows.append((T if axis == "T" else x, v))
    write_csv(args.output, [axis, "G"], rows)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_simulate(args):
    params = _params(args)
    try:
        spec = SimSpec(args.z0, args.T, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.trial < 0:
        raise UsageError("--trial must be >= 0")
    simulate(params, spec, args.trial).to_csv(args.output)
    return EXIT_OK


def cmd_validate(args):
    params = _params(args)
    try:
        spec = SimSpec(args.z0, args.T, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.trials < 2:
        raise UsageError("--trials must be >= 2")
    which = ["z", "n"] if args.which == "both" else [args.which]
    rows, ok = [], True
    for q in which:
        ode_fn, mc_fn = (log_mgf_Z, mc_log_mgf_Z) if q == "z" else (log_mgf_N, mc_log_mgf_N)
        for th in args.theta:
            ode = ode_fn(params, args.z0, th, args.T, args.tol)
            if math.isinf(ode):
                rows.append((q, th, None, None, ode, None, "infinite MGF"))
                continue
            est, se = mc_fn(params, spec, th, args.trials)
            if se == 0.0:
                z = 0.0 if est == ode else math.inf
            else:
                z = (est - ode) / se
            passed = abs(z) <= Z_LIMIT
            ok &= passed
            rows.append((q, th, est, se, ode, z, "ok" if passed else "mismatch"))
    write_csv(args.output, ["quantity", "theta", "mc_log_mgf", "standard_error",
                            "ode_log_mgf", "z_score", "status"], rows)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_regime(args):
    params = _params(args)
    _positive(T=args.T)
    regime = rg.classify(params)
    rows = []
    a, T = params.alpha, args.T
    if regime is rg.Regime.CRITICAL:
        for x in args.x:
            rows.append(("rate_Z", x, rg.critical_rate_Z(a, x, T)))
        for x in args.x:
            rows.append(("rate_N", x, rg.critical_rate_N(a, x, T)))
        pole = rg.critical_pole(a, T)
        for th in np.linspace(-pole, 0.99 * pole, args.theta_samples).tolist():
            rows.append(("lambda", th, rg.critical_lambda(a, th, T)))
    elif regime is rg.Regime.SUBCRITICAL:
        for x in args.x:
            rows.append(("rate_N", x, rg.subcritical_rate(params, x, T)))
        for x in args.x:
            rows.append(("rate_I0", x, rg.subcritical_rate_I0(params, x)))
        if params.mu > 0:
            for x in args.x:
                rows.append(("rate_I1", x, rg.subcritical_rate_I1(params, x, T)))
    else:
        try:
            lim = rg.degenerate_limits(params, regime, T)
        except ValueError as exc:
            raise UsageError(str(exc))
        rows += [("z_limit", T, lim.z_limit), ("n_limit", T, lim.n_limit),
                 ("z_exponent", T, lim.z_exponent), ("rate_gap", T, lim.rate_gap)]
    write_csv(args.output, ["curve", "arg", "value"], rows)
    return EXIT_OK


def figure_datasets(params, points=40, tol=DEFAULT_TOL):
    """name -> (header, rows) for the five figure datasets (two panels each)."""
    claims = app.ClaimModel("poisson", 1.0)

    def lin(lo, hi, *extra):
        # extra points (the fluid-limit zeros) are merged in so minima sit on the grid
        return sorted(set(np.linspace(lo, hi, points).tolist()) | set(extra))

    def curve(fn, xs):
        return [(x, fn(x)) for x in xs]

    window = app.lln_window_max(params, 5.0, 1.0)
    z3 = optimal_path_Z(params, 3.0, 5.0, 2048, tol)
    n8 = optimal_path_N(params, 8.0, 5.0, 2048, tol)
    return {
        "fig1a_J_vs_x": (["x", "J"], curve(lambda x: rate_J(params, x, 5.0, tol).value,
                                             lin(0.5, 6.0, params.lln_z(5.0)))),
        "fig1b_J_vs_T": (["T", "J"], curve(lambda T: rate_J(params, 3.0, T, tol).value,
                                             lin(0.25, 10.0))),
        "fig2a_H_vs_x": (["x", "H"], curve(lambda x: rate_H(params, x, 5.0, tol).value,
                                             lin(0.0, 12.0, params.psi(5.0)))),
        "fig2b_H_vs_T": (["T", "H"], curve(lambda T: rate_H(params, 5.0, T, tol).value,
                                             lin(0.25, 10.0))),
        "fig3a_path_Z": (["t", "value"], list(zip(z3.times.tolist(), z3.values.tolist()))),
        "fig3b_path_N": (["t", "value"], list(zip(n8.times.tolist(), n8.values.tolist()))),
        "fig4a_Itau_vs_T": (["T", "I_tau"],
                            app.ruin_sweep_T(params, claims, 0.5, lin(0.02, 0.5), tol)),
        "fig4b_Itau_vs_x": (["x", "I_tau"],
                            app.ruin_sweep_x(params, claims, lin(0.25, 1.0), 0.2, tol)),
        "fig5a_G_vs_x": (["x", "G"], app.queue_sweep_x(params, lin(0.5, 8.0, window), 5.0, 1.0,
                                                       tol)),
        "fig5b_G_vs_T": (["T", "G"], app.queue_sweep_T(params, 5.0, lin(0.5, 5.0), 1.0, tol)),
    }


def cmd_figures(args):
    params = _params(args)
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    os.makedirs(args.outdir, exist_ok=True)
    data = figure_datasets(params, args.points, args.tol)
    listing = []
    for name, (header, rows) in data.items():
        path = os.path.join(args.outdir, name + ".csv")
        write_csv(path, header, rows)
        listing.append((name, path, len(rows)))
    write_csv(args.output, ["dataset", "path", "rows"], listing)
    return EXIT_OK


COMMANDS = {"rate": cmd_rate, "path": cmd_path, "ruin": cmd_ruin, "queue": cmd_queue,
            "simulate": cmd_simulate, "validate": cmd_validate, "regime": cmd_regime,
            "figures": cmd_figures}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _with_config(argv)
    except (OSError, UsageError) as exc:
        parser.error(str(exc))
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except NUMERIC_ERRORS as exc:
        print(f"hawkes-ldp {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Every subcommand accepts ``--config FILE``, a flat ``key=value`` file whose
keys are the long option names (``-`` or ``_`` both accepted).  Flags given
on the command line override the file.  The resolved configuration is echoed
to stderr and written as ``# key=value`` lines at the top of CSV output.

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import finite_bandwidth as fb
from . import monte_carlo as mc
from .errors import BracketError, SingularFitError
from .estimator import AssignmentRule, Dataset, Strategy, fit_local_linear
from .io import CsvFormatError, read_columns, write_rows
from .kernels import KERNEL_NAMES, get_kernel, load_kernel_csv

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

# argparse destinations that are not part of the run configuration
_INTERNAL = {"command", "config", "func"}


class UsageError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _names(text: str) -> list[str]:
    return [v.strip().lower() for v in str(text).split(",") if v.strip()]


def read_config(path) -> dict[str, str]:
    """Parse a flat ``key=value`` file; ``#`` starts a comment line."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


# --------------------------------------------------------------------------
# shared option groups


def _add_kernel(p, default="triangular"):
    p.add_argument("--kernel", default=default, help=f"one of {', '.join(KERNEL_NAMES)}")
    p.add_argument("--kernel-csv", default=None, help="tabulated kernel with columns u,k on [0,1]")


def _add_prims(p):
    g = p.add_argument_group("problem primitives at the threshold")
    g.add_argument("--f-t", type=float, default=None, help="density of x at t")
    g.add_argument("--sigma2-plus", type=float, default=None)
    g.add_argument("--sigma2-minus", type=float, default=None)
    g.add_argument("--mu2-plus", type=float, default=None)
    g.add_argument("--mu2-minus", type=float, default=None)


def _add_out(p):
    p.add_argument("--out", default=None, help="output CSV path (default: stdout)")


def _kernel(args):
    if getattr(args, "kernel_csv", None):
        return load_kernel_csv(args.kernel_csv)
    return get_kernel(args.kernel)


def _kernels(args):
    names = _names(args.kernels) if args.kernels else list(KERNEL_NAMES)
    return [get_kernel(n) for n in names]


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _prims(args):
    _need(args, "f_t", "sigma2_plus", "sigma2_minus", "mu2_plus", "mu2_minus")
    return asy.ProblemPrimitives(args.f_t, args.sigma2_plus, args.sigma2_minus, args.mu2_plus, args.mu2_minus)


def _emit(args, header, rows):
    comments = resolved_config(args)
    if args.out:
        write_rows(args.out, header, rows, comments)
    else:
        write_rows(sys.stdout, header, rows, comments)


# --------------------------------------------------------------------------
# commands


def cmd_constants(args):
    rows = []
    for k in _kernels(args):
        rows.append((k.kind, f"{asy.relative_amse(k):.2f}", f"{asy.theta_star(k):.3f}"))
    _emit(args, ["kernel", "relative_amse", "theta_star"], rows)


def cmd_bias_free(args):
    rows = [(k.kind, f"{fb.bias_free_bandwidth(k, 1.0):.4f}") for k in _kernels(args)]
    _emit(args, ["kernel", "h_over_delta"], rows)


def cmd_eff_curve(args):
    k = _kernel(args)
    ratios = args.deltas if args.deltas is not None else list(np.linspace(0.0, 1.0, args.points))
    if args.kind != "mc":
        curve = fb.eff_curve(k, ratios, args.kind, h=args.h)
        _emit(args, ["delta_ratio", "eff"], curve.points)
        return
    _need(args, "seed")
    if args.x_csv:
        x = np.asarray(read_columns(args.x_csv, ["x"])["x"]) - args.t
    elif args.grid_size:
        n = args.grid_size
        x = (2 * np.arange(1, n + 1) - n - 1) / n
    else:
        raise UsageError("--kind mc needs --x-csv or --grid-size")
    deltas = [r * args.h for r in ratios]
    vals = mc.empirical_eff_values(x, deltas, args.h, k, args.reps, args.seed, args.strategy, args.workers)
    summaries = [mc.EffSummary.from_values(d, row) for d, row in zip(deltas, vals)]
    comments = resolved_config(args)
    if args.long_out:
        mc.write_eff_long(args.long_out, deltas, vals, comments)
    mc.write_eff_summary(args.out or sys.stdout, summaries, comments)


def cmd_amse(args):
    _need(args, "h", "n")
    k, prims = _kernel(args), _prims(args)
    if args.design == "rdd":
        terms = asy.amse_rdd_terms(args.h, args.n, prims, k)
    else:
        terms = asy.amse_tbd_p_terms(args.h, args.n, prims, k, args.p)
    _emit(args, ["design", "bias_sq", "variance", "amse"], [(args.design, terms.bias_sq, terms.variance, terms.total)])


def cmd_bandwidth(args):
    _need(args, "n")
    k, prims = _kernel(args), _prims(args)
    designs = ["rdd", "tbd"] if args.design == "both" else [args.design]
    rows = [(d, asy.h_opt(d, args.n, prims, k, args.p)) for d in designs]
    _emit(args, ["design", "h_opt"], rows)


def _sampler(args):
    if args.sampler == "csv":
        _need(args, "x_csv")
        return mc.XSampler.from_csv(args.x_csv)
    return mc.XSampler(args.sampler, args.a, args.b)


def cmd_simulate(args):
    _need(args, "seed", "n")
    spec = mc.DgpSpec(
        args.mu_plus, args.mu_minus, args.sigma_plus, args.sigma_minus, _sampler(args), args.t
    )
    rule = AssignmentRule(args.t, args.delta, args.p, args.strategy)
    data = mc.simulate_dgp(spec, args.n, rule, args.seed)
    data.to_csv(args.out or sys.stdout, resolved_config(args))


def cmd_fit(args):
    _need(args, "data", "h")
    data = Dataset.from_csv(args.data)
    if data.z is None or data.y is None:
        raise UsageError(f"{args.data}: fitting needs columns x, z and y")
    res = fit_local_linear(data, args.t, args.h, _kernel(args))
    row = (*map(float, res.beta), res.tau_thresh, res.var_beta3_over_sigma2, res.n_eff)
    _emit(args, ["beta1", "beta2", "beta3", "beta4", "tau_thresh", "var_beta3_over_sigma2", "n_eff"], [row])


def cmd_curve(args):
    _need(args, "n")
    mults = args.h_multiples or list(np.linspace(0.25, 3.0, 45))
    pts = asy.bias_variance_curve(_kernel(args), _prims(args), args.n, mults)
    _emit(args, ["h_mult", "bias_sq_rdd", "variance_rdd", "bias_sq_tbd", "variance_tbd"], pts)


def cmd_p_sweep(args):
    k = _kernel(args)
    ps = args.p_grid or list(np.linspace(0.01, 0.99, 99))
    rows = [(r, p, asy.relative_amse_p(k, args.theta, p, r)) for r in args.r for p in ps]
    _emit(args, ["r", "p", "relative_amse"], rows)


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tiebreaker",
        description="Design and evaluate tie-breaker experiments against the sharp RDD.",
    )
    subs = parser.add_subparsers(dest="command", metavar="COMMAND")
    subs.required = True

    def sub(name, func, help):
        p = subs.add_parser(name, help=help, description=help)
        p.add_argument("--config", default=None, help="flat key=value config file")
        p.set_defaults(func=func)
        return p

    p = sub("constants", cmd_constants, "relative AMSE and theta* per kernel")
    p.add_argument("--kernels", default=None, help="comma-separated kernel names (default: all)")
    _add_out(p)

    p = sub("bias-free", cmd_bias_free, "bias-free bandwidth as a multiple of delta")
    p.add_argument("--kernels", default=None, help="comma-separated kernel names (default: all)")
    _add_out(p)

    p = sub("eff-curve", cmd_eff_curve, "efficiency ratio over delta/h")
    p.add_argument("--kind", choices=["theory", "closed", "mc"], default="theory")
    _add_kernel(p, "boxcar")
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--deltas", type=_floats, default=None, help="comma-separated delta/h values")
    p.add_argument("--points", type=int, default=101, help="grid size on [0, 1] when --deltas is absent")
    p.add_argument("--x-csv", default=None, help="running-variable CSV with column x (mc)")
    p.add_argument("--grid-size", type=int, default=None, help="use x_i=(2i-N-1)/N (mc)")
    p.add_argument("--t", type=float, default=0.0, help="threshold subtracted from --x-csv values")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default="stratified")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--long-out", default=None, help="also write delta,rep,eff rows here")
    _add_out(p)

    p = sub("amse", cmd_amse, "asymptotic MSE at a given bandwidth")
    p.add_argument("--design", choices=["rdd", "tbd"], default="tbd")
    _add_kernel(p)
    _add_prims(p)
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--n", type=float, default=None)
    p.add_argument("--p", type=float, default=0.5)
    _add_out(p)

    p = sub("bandwidth", cmd_bandwidth, "AMSE-optimal bandwidth")
    p.add_argument("--design", choices=["rdd", "tbd", "both"], default="both")
    _add_kernel(p)
    _add_prims(p)
    p.add_argument("--n", type=float, default=None)
    p.add_argument("--p", type=float, default=0.5)
    _add_out(p)

    p = sub("simulate", cmd_simulate, "simulate a dataset from a polynomial DGP")
    p.add_argument("--mu-plus", type=_floats, default=[0.0], help="coefficients in x-t, ascending")
    p.add_argument("--mu-minus", type=_floats, default=[0.0])
    p.add_argument("--sigma-plus", type=float, default=1.0)
    p.add_argument("--sigma-minus", type=float, default=1.0)
    p.add_argument("--sampler", choices=["grid", "uniform", "csv"], default="uniform")
    p.add_argument("--a", type=float, default=-1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--x-csv", default=None)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default="stratified")
    p.add_argument("--seed", type=int, default=None)
    _add_out(p)

    p = sub("fit", cmd_fit, "local linear fit of a dataset CSV")
    p.add_argument("--data", default=None, help="CSV with columns x,z,y")
    _add_kernel(p)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--h", type=float, default=None)
    _add_out(p)

    p = sub("curve", cmd_curve, "squared bias and variance against bandwidth")
    _add_kernel(p)
    _add_prims(p)
    p.add_argument("--n", type=float, default=None)
    p.add_argument("--h-multiples", type=_floats, default=None, help="multiples of the RDD optimal h")
    _add_out(p)

    p = sub("p-sweep", cmd_p_sweep, "relative AMSE against the window treatment probability")
    _add_kernel(p)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--r", type=_floats, default=[0.5], help="relative variances, comma-separated")
    p.add_argument("--p-grid", type=_floats, default=None)
    _add_out(p)
    return parser


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def resolved_config(args) -> dict:
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in _INTERNAL:
            continue
        if isinstance(value, list):
            value = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        out[key] = value
    out["command"] = args.command
    return out


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        sub = _subparser(parser, args.command)
        known = {a.dest for a in sub._actions} - _INTERNAL - {"help"}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise UsageError(f"{args.config}: unknown key(s) for {args.command}: {', '.join(unknown)}")
        # string defaults go through each option's type conversion
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        for key, value in resolved_config(args).items():
            print(f"# {key}={value}", file=sys.stderr)
        args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (SingularFitError, BracketError) as exc:
        print(f"tiebreaker: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, FileNotFoundError, IsADirectoryError) as exc:
        # DomainError, KernelValidationError and CsvFormatError are ValueErrors
        print(f"tiebreaker: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Data goes to stdout as a JSON envelope (default) or CSV records; diagnostics
go to stderr. Exit codes: 0 success, 1 domain or convergence error, 2 usage
error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict

from . import __version__
from ._backend import BACKEND
from .analysis import (
    SweepConfig,
    is_monotone_decreasing,
    run_discrete_limit,
    run_limit_sweep,
    run_stirling_study,
)
from .dist import (
    HeineParams,
    MultipleHeineParams,
    QBinomialParams,
    QMultinomialParams,
    chain_moments,
    heine_deformed_moments,
    heine_logpmf,
    heine_support_cutoff,
    multiple_heine_logpmf,
    qbinomial_logpmf,
    qmultinomial_logpmf,
    sample,
    simplex_points,
)
from .errors import OutOfSupportError, QLimitError
from .qcalc import QContext
from .swapprox import chain_frames, multiple_heine_sw_log_approx, qmultinomial_sw_log_approx


class UsageError(Exception):
    pass


def _ints(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"{args.command} needs {flags}")


def _coords(xs):
    return {f"x{j + 1}": int(x) for j, x in enumerate(xs)}


def _qmultinomial_params(args):
    thetas = args.thetas
    if thetas is None and getattr(args, "theta", None) is not None:
        thetas = (args.theta,)
    if thetas is None and getattr(args, "alphas", None) is not None:
        return QMultinomialParams.from_alphas(args.n, args.alphas, QContext(args.q))
    if thetas is None:
        raise UsageError(f"{args.command} needs --thetas (or --theta / --alphas)")
    return QMultinomialParams(args.n, thetas, QContext(args.q))


# ------------------------------------------------------------------ commands

def cmd_pmf(args):
    _require(args, "q")
    ctx = QContext(args.q)
    rows = []
    if args.dist in ("qbinomial", "qmultinomial"):
        _require(args, "n")
        params = _qmultinomial_params(args)
        if args.dist == "qbinomial" and params.k != 1:
            raise UsageError("qbinomial takes a single --theta")
        if args.all:
            outcomes = [tuple(int(v) for v in p) for p in simplex_points(params.n, params.k)]
        else:
            outcomes = [_outcome_arg(args, params.k)]
        for xs in outcomes:
            if params.k == 1:
                lp = qbinomial_logpmf(QBinomialParams(params.n, params.thetas[0], ctx), xs[0])
            else:
                lp = qmultinomial_logpmf(params, xs)
            rows.append({**_coords(xs), "pmf": math.exp(lp), "log_pmf": lp})
    elif args.dist == "heine":
        _require(args, "lam")
        params = HeineParams(args.lam, ctx)
        if args.all:
            x_max, _ = heine_support_cutoff(params)
            outcomes = range(x_max + 1)
        else:
            outcomes = [_outcome_arg(args, 1)[0]]
        for x in outcomes:
            lp = heine_logpmf(params, x)
            rows.append({"x1": x, "pmf": math.exp(lp), "log_pmf": lp})
    else:
        _require(args, "lambdas")
        params = MultipleHeineParams(args.lambdas, ctx)
        if args.all:
            raise UsageError("--all is not supported for multiheine; give --xs")
        xs = _outcome_arg(args, len(params.lambdas))
        lp = multiple_heine_logpmf(params, xs)
        rows.append({**_coords(xs), "pmf": math.exp(lp), "log_pmf": lp})
    return rows, []


def _outcome_arg(args, k):
    if args.xs is not None:
        xs = args.xs
    elif args.x is not None:
        xs = (args.x,)
    else:
        raise UsageError("give --x, --xs or --all")
    if len(xs) != k:
        raise UsageError(f"outcome needs {k} coordinates, got {len(xs)}")
    return xs


def cmd_moments(args):
    _require(args, "q")
    if args.dist == "heine":
        _require(args, "lam")
        m = heine_deformed_moments(HeineParams(args.lam, QContext(args.q)), literal=args.literal)
        return [{"j": 1, "mean": m.mean, "variance": m.variance}], []
    _require(args, "n")
    params = _qmultinomial_params(args)
    prefix = args.prefix or ()
    if len(prefix) >= params.k:
        raise UsageError(f"--prefix may hold at most {params.k - 1} counts")
    # pad so chain_moments yields frames up to coordinate len(prefix)+1
    padded = tuple(prefix) + (0,) * (params.k - len(prefix))
    moments = chain_moments(params, padded)
    rows = []
    for j, m in enumerate(moments[: len(prefix) + 1]):
        rows.append({"j": j + 1, "s_prev": sum(prefix[:j]), "mean": m.mean, "variance": m.variance})
    return rows, []


def cmd_approx(args):
    _require(args, "q", "xs")
    ctx = QContext(args.q)
    warnings = []
    if args.dist == "multiheine":
        _require(args, "lambdas")
        params = MultipleHeineParams(args.lambdas, ctx)
        exact_lp = multiple_heine_logpmf(params, args.xs)
        approx_lp = _guard(lambda: multiple_heine_sw_log_approx(args.xs, params, literal=args.literal), warnings)
    else:
        _require(args, "n")
        params = _qmultinomial_params(args)
        if len(args.xs) != params.k:
            raise UsageError(f"outcome needs {params.k} coordinates")
        exact_lp = qmultinomial_logpmf(params, args.xs)
        approx_lp = _guard(lambda: qmultinomial_sw_log_approx(args.xs, chain_frames(params, args.xs), args.q), warnings)
    exact = math.exp(exact_lp)
    row = {**_coords(args.xs), "exact": exact, "log_exact": exact_lp}
    if approx_lp is None:
        row.update(approx=None, rel_error=None)
    else:
        approx = math.exp(approx_lp)
        row.update(approx=approx, rel_error=abs(approx - exact) / exact)
    return [row], warnings


def _guard(fn, warnings):
    try:
        return fn()
    except OutOfSupportError as exc:
        warnings.append(str(exc))
        return None


def cmd_sample(args):
    _require(args, "q", "n")
    params = _qmultinomial_params(args)
    draws = sample(params, args.count, args.seed)
    return [{"i": i, **_coords(row)} for i, row in enumerate(draws)], []


def cmd_converge(args):
    _require(args, "q", "n_values")
    warnings = []
    if args.mode == "limit":
        _require(args, "alphas")
        report = run_limit_sweep(
            SweepConfig(args.q, args.n_values, alphas=args.alphas, central_fraction=args.central_fraction)
        )
    else:
        _require(args, "thetas")
        report = run_discrete_limit(SweepConfig(args.q, args.n_values, thetas=args.thetas, x_max=args.x_max))
    column = report.column("sup_rel_error" if args.mode == "limit" else "sup_abs_error")
    if not is_monotone_decreasing(column):
        warnings.append("error column is not monotone decreasing beyond one allowed break")
    warnings.append(report.note)
    return [asdict(r) for r in report.records], warnings


def cmd_stirling(args):
    _require(args, "q_values", "n_values")
    return [asdict(r) for r in run_stirling_study(args.n_values, args.q_values)], []


COMMANDS = {
    "pmf": cmd_pmf,
    "moments": cmd_moments,
    "approx": cmd_approx,
    "sample": cmd_sample,
    "converge": cmd_converge,
    "stirling": cmd_stirling,
}


# ------------------------------------------------------------------- parser

def build_parser():
    parser = argparse.ArgumentParser(prog="qlimit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qlimit {__version__} ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        return p

    def dist_flags(p, choices, default):
        p.add_argument("--dist", choices=choices, default=default)
        p.add_argument("--q", type=float)
        p.add_argument("--n", type=int)
        p.add_argument("--theta", type=float)
        p.add_argument("--thetas", type=_floats)
        p.add_argument("--alphas", type=_floats, help="theta_j = q^(-alpha_j n)")
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--lambdas", type=_floats)

    p = common(sub.add_parser("pmf", help="exact probabilities"))
    dist_flags(p, ("qbinomial", "qmultinomial", "heine", "multiheine"), "qbinomial")
    p.add_argument("--x", type=int)
    p.add_argument("--xs", type=_ints)
    p.add_argument("--all", action="store_true", help="enumerate the whole (tail-bounded) support")

    p = common(sub.add_parser("moments", help="moments of the deformed variables"))
    dist_flags(p, ("qbinomial", "qmultinomial", "heine"), "qmultinomial")
    p.add_argument("--prefix", type=_ints, help="conditioning counts x_1..x_{j-1}")
    p.add_argument("--literal", action="store_true", help="Heine variance lam q^-1(1-q) + lam (linear in lam)")

    p = common(sub.add_parser("approx", help="Stieltjes-Wigert approximation vs exact pmf"))
    dist_flags(p, ("qmultinomial", "multiheine"), "qmultinomial")
    p.add_argument("--xs", type=_ints)
    p.add_argument("--literal", action="store_true", help="drop the +1/q shift (multiheine)")

    p = common(sub.add_parser("sample", help="draw q-multinomial outcomes"))
    p.add_argument("--q", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--thetas", type=_floats)
    p.add_argument("--alphas", type=_floats)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)

    p = common(sub.add_parser("converge", help="limit-theorem error sweeps"))
    p.add_argument("--mode", choices=("limit", "discrete"), default="limit")
    p.add_argument("--q", type=float)
    p.add_argument("--n", dest="n_values", type=_ints)
    p.add_argument("--alphas", type=_floats)
    p.add_argument("--thetas", type=_floats)
    p.add_argument("--central-fraction", type=float, default=0.1)
    p.add_argument("--x-max", type=int, default=8)

    p = common(sub.add_parser("stirling", help="q-Stirling ratio study"))
    p.add_argument("--q", dest="q_values", type=_floats)
    p.add_argument("--n", dest="n_values", type=_ints)
    return parser


def _envelope(argv, args, rows, warnings):
    config = {k: v for k, v in vars(args).items() if k not in ("command", "format")}
    return {
        "tool": "qlimit",
        "version": __version__,
        "command": args.command,
        "argv": list(argv),
        "config": config,
        "records": rows,
        "warnings": warnings,
    }


def _to_csv(rows):
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if v is None else repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rows, warnings = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qlimit {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except QLimitError as exc:
        print(f"qlimit {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.format == "csv":
        sys.stdout.write(_to_csv(rows))
    else:
        json.dump(_envelope(argv, args, rows, warnings), sys.stdout, allow_nan=True)
        sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())

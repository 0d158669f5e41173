"""Command line interface: ``polwishart <subcommand> ...``.

Exit codes: 0 on success, 1 on a domain or validation error (reported on
stderr as ``error[CODE]: message``), 2 on a usage error.
"""

import argparse
import json
import sys

import numpy as np

from . import dataio
from .distances import DEFAULT_BETA, DistanceMeasure, distance
from .errors import ValidationError, WishartError
from .estimation import fit
from .experiments import (
    block_study,
    default_workers,
    empirical_size,
    robustness_study,
    sensitivity_sweep,
)
from .hypothesis import run_test
from .wishart import FOREST_B, ContaminationSpec, WishartParams, sample, sample_contaminated


def _matrix_json(m):
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m)]


def _emit_json(obj):
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _load_sigma(value):
    if value == "B":
        return FOREST_B
    z = dataio.read_sample(value)
    if len(z) != 1:
        raise ValidationError(f"{value}: expected exactly one matrix, found {len(z)}", key="sigma")
    return z[0]


def _measure(text):
    try:
        return DistanceMeasure.parse(text)
    except WishartError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _alphas(text):
    try:
        values = tuple(float(a) for a in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alpha list {text!r}") from None
    if not values or any(not 0 < a < 1 for a in values):
        raise argparse.ArgumentTypeError("alpha levels must lie in (0, 1)")
    return values


def _grid(text):
    parts = text.split(":")
    try:
        a, b, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except (IndexError, ValueError):
        raise argparse.ArgumentTypeError(f"grid must be a:b:steps, got {text!r}") from None
    if len(parts) != 3 or steps < 1:
        raise argparse.ArgumentTypeError(f"grid must be a:b:steps with steps >= 1, got {text!r}")
    return np.linspace(a, b, steps)


def _vary(text):
    if text == "looks":
        return "looks"
    key, sep, rest = text.partition("=")
    if key == "sigma-entry" and sep:
        try:
            i, j = (int(v) for v in rest.split(","))
        except ValueError:
            pass
        else:
            return ("sigma", i, j)
    raise argparse.ArgumentTypeError(f"--vary takes 'looks' or 'sigma-entry=i,j', got {text!r}")


def _write_table(out, header, rows):
    if out in (None, "-"):
        dataio.write_csv(sys.stdout, header, rows)
    else:
        dataio.write_csv(out, header, rows)


def cmd_simulate(args):
    sigma = _load_sigma(args.sigma)
    if args.scale_k is not None:
        if not args.scale_k > -1:
            raise ValidationError(f"--scale-k must exceed -1, got {args.scale_k}", key="scale-k")
        sigma = sigma * (1.0 + args.scale_k)
    params = WishartParams(args.looks, sigma)
    if args.contaminate is None:
        zs = sample(params, args.n, args.seed)
    else:
        eps, scale = args.contaminate
        zs = sample_contaminated(params, ContaminationSpec(eps, scale), args.n, args.seed)
    dataio.write_sample(zs, args.out, overwrite=args.force)


def cmd_estimate(args):
    zs = dataio.read_sample(args.in_)
    res = fit(zs, fixed_looks=args.fixed_looks)
    _emit_json({
        "n": len(zs),
        "looks": res.params.looks,
        "sigma": _matrix_json(res.params.sigma),
        "crlb_looks_variance": res.crlb_looks_variance,
        "iterations": res.iterations,
    })


def cmd_distance(args):
    fa = fit(dataio.read_sample(args.a), fixed_looks=args.fixed_looks).params
    fb = fit(dataio.read_sample(args.b), fixed_looks=args.fixed_looks).params
    _emit_json({
        "measure": args.measure.label,
        "distance": distance(args.measure, fa, fb),
        "looks_a": fa.looks,
        "looks_b": fb.looks,
    })


def cmd_test(args):
    res = run_test(
        args.measure,
        dataio.read_sample(args.a),
        dataio.read_sample(args.b),
        alpha_levels=args.alpha,
        fixed_looks=args.fixed_looks,
        dof=args.dof,
    )
    _emit_json({
        "measure": args.measure.label,
        "statistic": res.statistic,
        "dof": res.dof,
        "p_value": res.p_value,
        "reject": {f"{a:g}": bool(r) for a, r in res.reject_at.items()},
    })


def _workers(args):
    return default_workers() if args.workers is None else args.workers


def cmd_mc_size(args):
    config = dataio.read_config(args.config)
    rows = empirical_size(config, workers=_workers(args))
    _write_table(args.out, *dataio.size_table(rows, config.alpha_levels, timing=args.timing))


def cmd_robustness(args):
    config = dataio.read_config(args.config)
    rows = robustness_study(config, measure=args.measure, workers=_workers(args))
    _write_table(args.out, *dataio.robustness_table(rows, config.alpha_levels))


def cmd_sensitivity(args):
    fixed = WishartParams(args.fixed_looks, _load_sigma(args.sigma))
    points = sensitivity_sweep(fixed, args.vary, args.grid, args.measures)
    header = ["value", "measure", "distance", "status"]
    _write_table(args.out, header, [[p.value, p.measure, p.distance, p.status] for p in points])


def cmd_blocks(args):
    zs = dataio.read_sample(args.in_)
    rows, sizes = block_study(
        zs, args.nx, args.ny, args.measure, args.alpha, args.remaining, args.fixed_looks, args.dof
    )
    header = ["x_block", "y_block", "statistic", "dof", "p_value"] + [f"reject_{a:g}" for a in args.alpha]
    body = [
        [r.x_block, r.y_block, r.statistic, r.dof, r.p_value] + [r.reject_at[a] for a in args.alpha]
        for r in rows
    ]
    _write_table(args.out, header, body)
    if not rows:
        print("warning: no block pair could be formed (empty pairing)", file=sys.stderr)
    else:
        summary = ", ".join(f"{a:g}: {s:.4f}" for a, s in sizes.items())
        print(f"{len(rows)} block pairs; rejection rate {summary}", file=sys.stderr)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="polwishart",
        description="Hypothesis tests between scaled complex Wishart samples.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    measure_help = f"kl, chi2, renyi, renyi=<beta> (default beta {DEFAULT_BETA}), bhattacharyya or hellinger"
    sigma_help = "sample file holding one covariance matrix, or B for the built-in forest covariance"

    p = sub.add_parser("simulate", help="draw a Wishart sample and write it to a sample file")
    p.add_argument("--looks", type=int, required=True, help="number of looks L (integer >= p)")
    p.add_argument("--sigma", required=True, help=sigma_help)
    p.add_argument("--n", type=int, required=True, help="number of matrices to draw")
    p.add_argument("--seed", type=int, required=True, help="random seed (nonnegative integer)")
    p.add_argument("--contaminate", type=float, nargs=2, metavar=("EPS", "SCALE"),
                   help="draw each matrix from SCALE * Sigma with probability EPS")
    p.add_argument("--scale-k", type=float, metavar="K", help="use (1 + K) * Sigma instead of Sigma")
    p.add_argument("--out", required=True, help="output sample file")
    p.add_argument("--force", action="store_true", help="overwrite an existing output file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="ML estimates of L and Sigma for a sample (JSON on stdout)")
    p.add_argument("--in", dest="in_", required=True, help="input sample file")
    p.add_argument("--fixed-looks", type=float, help="treat L as known instead of estimating it")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("distance", help="distance between the ML fits of two samples (JSON on stdout)")
    p.add_argument("--a", required=True, help="first sample file")
    p.add_argument("--b", required=True, help="second sample file")
    p.add_argument("--measure", type=_measure, default=DistanceMeasure("kl"), help=measure_help + " (default kl)")
    p.add_argument("--fixed-looks", type=float, help="treat L as known instead of estimating it")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("test", help="homogeneity test between two samples (JSON on stdout)")
    p.add_argument("--a", required=True, help="first sample file")
    p.add_argument("--b", required=True, help="second sample file")
    p.add_argument("--measure", type=_measure, default=DistanceMeasure("kl"), help=measure_help + " (default kl)")
    p.add_argument("--alpha", type=_alphas, default=(0.01, 0.05),
                   help="comma separated significance levels (default 0.01,0.05)")
    p.add_argument("--fixed-looks", type=float, help="treat L as known; dof defaults to p^2")
    p.add_argument("--dof", type=int, help="override the chi-square degrees of freedom (default p^2 + 1)")
    p.set_defaults(func=cmd_test)

    def add_workers(p):
        p.add_argument("--workers", type=int,
                       help="worker processes (default: available CPUs, or POLWISHART_WORKERS); "
                            "results do not depend on it")

    p = sub.add_parser("mc-size", help="Monte Carlo empirical test sizes (CSV)")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.add_argument("--timing", action="store_true",
                   help="fill the wall_time_ms column (mean ms per test); output is then not byte-reproducible")
    add_workers(p)
    p.set_defaults(func=cmd_mc_size)

    p = sub.add_parser("robustness", help="empirical size with a contaminated X sample (CSV)")
    p.add_argument("--config", required=True,
                   help="JSON experiment config; contamination defaults to epsilon 1e-5, scale 1000")
    p.add_argument("--measure", type=_measure, default=DistanceMeasure("kl"), help=measure_help + " (default kl)")
    p.add_argument("--out", help="output CSV (default stdout)")
    add_workers(p)
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("sensitivity", help="distance to a one-parameter family of laws (CSV)")
    p.add_argument("--vary", type=_vary, required=True, help="looks, or sigma-entry=i,j (zero based; real part)")
    p.add_argument("--grid", type=_grid, required=True, help="a:b:steps, inclusive linear grid")
    p.add_argument("--fixed-looks", type=float, required=True, help="looks of the reference law")
    p.add_argument("--sigma", required=True, help=sigma_help)
    p.add_argument("--measures", type=lambda t: [_measure(m) for m in t.split(",")],
                   default=[DistanceMeasure(k) for k in ("chi2", "kl", "renyi", "bhattacharyya", "hellinger")],
                   help="comma separated measures (default all five, renyi=0.9)")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("blocks", help="tests between disjoint blocks of one sample (CSV)")
    p.add_argument("--in", dest="in_", required=True, help="input sample file")
    p.add_argument("--nx", type=int, required=True, help="X-block size")
    p.add_argument("--ny", type=int, required=True, help="Y-block size")
    p.add_argument("--measure", type=_measure, default=DistanceMeasure("kl"), help=measure_help + " (default kl)")
    p.add_argument("--alpha", type=_alphas, default=(0.01, 0.05),
                   help="comma separated significance levels (default 0.01,0.05)")
    p.add_argument("--remaining", choices=("block", "all"), default="block",
                   help="Y-blocks come from the complement of the X-block (block) "
                        "or from observations outside every X-block (all); default block")
    p.add_argument("--fixed-looks", type=float, help="treat L as known")
    p.add_argument("--dof", type=int, help="override the chi-square degrees of freedom")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_blocks)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    try:
        args.func(args)
    except WishartError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except FileExistsError as exc:
        print(f"error[FILE_EXISTS]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error[IO_ERROR]: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

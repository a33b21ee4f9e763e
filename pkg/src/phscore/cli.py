"""Command line interface: ``phscore {test,simulate,power}``.

Exit codes: 0 success, 2 data error, 3 numerical failure, 4 usage error.
"""

import argparse
import json
import sys

import numpy as np
from scipy import stats

from . import power as pw
from .cox import fit as fit_cox
from .exceptions import NumericalError, SurvivalDataError
from .numeric import std_normal_sf
from .phtest import FHAT_SIDES, per_covariate_report
from .phtest import test as ph_test
from .report import FORMATS, read_csv_sample, render_power, render_tests, write_csv_sample
from .simulate import simulate, spec_from_dict

EXIT_DATA, EXIT_NUMERICAL, EXIT_USAGE = 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _names(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def _alpha(text):
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser():
    parser = _Parser(prog="phscore", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("test", help="test proportional hazards on a CSV file")
    t.add_argument("--input", required=True, help="CSV file with a header row")
    t.add_argument("--time-col", default="time")
    t.add_argument("--status-col", default="status")
    t.add_argument("--covariates", type=_names, help="comma-separated covariate columns")
    t.add_argument("--test-set", type=_names, action="append", default=[],
                   help="extra group of covariates to test jointly (repeatable)")
    t.add_argument("--alpha", type=_alpha, default=0.05)
    t.add_argument("--missing", choices=("drop", "fail"), default="drop")
    t.add_argument("--fhat-side", choices=FHAT_SIDES, default="right")
    t.add_argument("--format", choices=FORMATS, default="text")

    s = sub.add_parser("simulate", help="draw a sample from a model spec (JSON)")
    s.add_argument("--spec", required=True, help="JSON file describing the model")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output", help="output CSV (standard output by default)")
    s.add_argument("--replicates", type=_positive_int, default=1,
                   help="with more than one replicate, test each and summarize")
    s.add_argument("--alpha", type=_alpha, default=0.05)
    s.add_argument("--format", choices=FORMATS, default="text")

    p = sub.add_parser("power", help="analytic and Monte Carlo power")
    p.add_argument("--spec", required=True, help="JSON file describing the model")
    p.add_argument("--c", type=float, action="append", required=True,
                   help="local alternative constant, gamma = c / sqrt(n) (repeatable)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--replicates", type=int, default=500)
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-plugin", type=int, default=100_000)
    p.add_argument("--mu-scaling", choices=pw.MU_SCALINGS, default="printed")
    p.add_argument("--format", choices=FORMATS, default="text")
    return parser


def _load_spec(path):
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise SurvivalDataError(f"cannot read spec: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SurvivalDataError(f"invalid JSON in {path}: {exc}") from None
    try:
        return spec_from_dict(config)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid model spec: {exc}") from None


def cmd_test(args, out):
    try:
        sample = read_csv_sample(
            args.input, args.time_col, args.status_col, args.covariates, args.missing
        )
    except OSError as exc:
        raise SurvivalDataError(f"cannot read {args.input}: {exc}") from None
    fit = fit_cox(sample)
    reports, overall = per_covariate_report(sample, args.alpha, fit, args.fhat_side)
    for group in args.test_set:
        reports.append(ph_test(sample, group, args.alpha, fit, args.fhat_side))
    out.write(render_tests(reports, overall, args.format, sample))


def _batch_summary(spec, args, out):
    statistics, failures = pw.simulate_statistics(spec, args.n, args.replicates, args.seed)
    pvals = 2 * std_normal_sf(np.abs(statistics))
    rows = []
    for j in range(spec.m):
        col = pvals[~np.isnan(pvals[:, j]), j]
        rows.append({
            "covariate": f"z{j + 1}",
            "replicates": int(col.size),
            "failures": failures,
            "rejection_rate": float(np.mean(col < args.alpha)),
            "ks_uniform_p": float(stats.kstest(col, "uniform").pvalue),
        })
    if args.format == "jsonl":
        out.write("".join(json.dumps(r) + "\n" for r in rows))
    elif args.format == "csv":
        out.write(",".join(rows[0]) + "\n")
        for r in rows:
            out.write(",".join(repr(v) if isinstance(v, float) else str(v)
                               for v in r.values()) + "\n")
    else:
        out.write(f"{'covariate':<10} {'reject':>7} {'KS p':>7}\n")
        for r in rows:
            out.write(f"{r['covariate']:<10} {r['rejection_rate']:>7.3f} "
                      f"{r['ks_uniform_p']:>7.3f}\n")


def cmd_simulate(args, out):
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    spec = _load_spec(args.spec)
    if args.replicates > 1:
        _batch_summary(spec, args, out)
        return
    sample = simulate(args.n, spec, seed=args.seed)
    if args.output:
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            write_csv_sample(sample, fh)
    else:
        write_csv_sample(sample, out)


def cmd_power(args, out):
    if args.n < 2 or args.replicates < 100 or args.n_plugin < 100:
        raise UsageError("--n >= 2, --replicates >= 100 and --n-plugin >= 100 required")
    spec = _load_spec(args.spec)
    if len(spec.tested) != 1:
        raise UsageError("power needs exactly one tested covariate in the model spec")
    limits = pw.plugin_limits(spec, args.n_plugin, args.seed)
    results = [
        pw.mc_power(spec, c, args.n, args.replicates, args.alpha, args.seed,
                    args.mu_scaling, limits=limits)
        for c in args.c
    ]
    out.write(render_power(results, args.format))


COMMANDS = {"test": cmd_test, "simulate": cmd_simulate, "power": cmd_power}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"phscore: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SurvivalDataError as exc:
        print(f"phscore: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"phscore: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``syngait {synthesize,tune,evaluate,copula,demo-data}``."""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import io
from .copula import GaussianCopulaSynthesizer
from .demo import generate_demo_sample
from .exceptions import InvalidConfig, SynGaitError
from .functional import QtsFPCA
from .metrics import evaluate
from .synthesis import DEFAULT_ALPHA0, SynGait, SynthesisConfig, TuningGrid, default_gamma, tune_scores

log = logging.getLogger("syngait")

EXIT_DOMAIN = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not np.isfinite(value) or value <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _fraction(text):
    value = float(text)
    if not np.isfinite(value) or value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _add_k_range(p):
    p.add_argument("--k-min", type=_positive_int, default=1, help="smallest k for the k-NNG sweep")
    p.add_argument("--k-max", type=_positive_int, default=None, help="largest k (default n - 1)")


def build_parser():
    parser = _Parser(prog="syngait", description="Synthetic unit quaternion time series generation.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synthesize", help="generate synthetic QTS with the avatar method")
    p.add_argument("--input", required=True, help="QTS CSV (subject_id,t,qw,qx,qy,qz)")
    p.add_argument("--gamma", type=_positive_int, default=None, help="number of neighbours (default ~n/10, >= 2)")
    p.add_argument("--tau", type=_positive_int, default=None,
                   help="components used for the neighbour search (default: 95%% inertia)")
    p.add_argument("--alpha0", type=_positive_float, default=DEFAULT_ALPHA0, help="total Dirichlet concentration")
    p.add_argument("--mode", choices=["dirichlet", "deterministic"], default="dirichlet")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exclude-mean", action="store_true",
                   help="do not add the functional mean back before exponentiating")
    p.add_argument("--out", required=True, help="output directory")
    _add_k_range(p)

    p = sub.add_parser("tune", help="grid-search gamma, tau and alpha0")
    p.add_argument("--input", required=True)
    p.add_argument("--alpha0", type=_positive_float, nargs="+", default=None,
                   help="alpha0 values (default: 100 log-spaced values up to 50)")
    p.add_argument("--gamma", type=_positive_int, nargs="+", default=None, help="gamma values (default 2..8)")
    p.add_argument("--tau", type=_positive_int, nargs="+", default=None, help="tau values (default 1..n-1)")
    p.add_argument("--reps", type=_positive_int, default=10)
    p.add_argument("--dmin-frac", type=_fraction, default=0.10,
                   help="d_min threshold as a fraction of the smallest original distance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="compare original and synthetic scores or QTS")
    p.add_argument("--original", required=True, help="score CSV or QTS CSV")
    p.add_argument("--synthetic", required=True, help="file of the same kind as --original")
    p.add_argument("--unpaired", action="store_true", help="rows are not in correspondence")
    p.add_argument("--out", required=True)
    _add_k_range(p)

    p = sub.add_parser("copula", help="generate synthetic QTS with the Gaussian copula baseline")
    p.add_argument("--input", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exclude-mean", action="store_true")
    p.add_argument("--out", required=True)
    _add_k_range(p)

    p = sub.add_parser("demo-data", help="write a seeded demo QTS sample")
    p.add_argument("--n", type=_positive_int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory (writes demo_qts.csv)")
    return parser


def _k_range(args, n):
    k_max = n - 1 if args.k_max is None else args.k_max
    if not 1 <= args.k_min <= k_max <= n - 1:
        raise InvalidConfig(f"k range must satisfy 1 <= k-min <= k-max <= {n - 1}")
    return range(args.k_min, k_max + 1)


def _run_pipeline(args, sample, estimator, method, paired):
    ks = _k_range(args, sample.n_subjects)
    estimator.fit(sample)
    result = estimator.sample_result(np.random.default_rng(args.seed))
    report = evaluate(result.scores, result.synthetic_scores, paired=paired, k_range=ks)
    io.write_outputs(args.out, sample, result.synthetic, result.scores, result.synthetic_scores,
                     result.model, report, method=method)
    return report


def cmd_synthesize(args):
    sample = io.read_qts_csv(args.input)
    n = sample.n_subjects
    gamma = default_gamma(n) if args.gamma is None else args.gamma
    SynthesisConfig(gamma, args.tau or 1, args.alpha0, args.seed, args.mode).validate(n)
    est = SynGait(gamma=gamma, tau=args.tau, alpha0=args.alpha0, mode=args.mode,
                  include_mean=not args.exclude_mean)
    report = _run_pipeline(args, sample, est, "syngait", paired=True)
    log.info("hidden rate %.3f, RV %.3f", report.hidden_rate, report.rv)


def cmd_copula(args):
    sample = io.read_qts_csv(args.input)
    est = SynGait(synthesizer=GaussianCopulaSynthesizer(), include_mean=not args.exclude_mean)
    _run_pipeline(args, sample, est, "copula", paired=False)


def cmd_tune(args):
    sample = io.read_qts_csv(args.input)
    n = sample.n_subjects
    defaults = TuningGrid()
    gammas = tuple(args.gamma) if args.gamma else tuple(g for g in defaults.gamma if g <= n - 1)
    grid = TuningGrid(
        alpha0=tuple(args.alpha0) if args.alpha0 else defaults.alpha0,
        gamma=gammas,
        tau=tuple(args.tau) if args.tau else None,
        repetitions=args.reps,
        dmin_fraction=args.dmin_frac,
    )
    grid.validate(n)
    fpca = QtsFPCA().fit(sample)
    report = tune_scores(fpca.scores_, grid, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    io.write_tuning_csv(report, os.path.join(args.out, "tuning.csv"))
    io.write_json(io.model_summary(fpca.model_), os.path.join(args.out, "model_summary.json"))
    best = report.best
    if best is not None:
        log.info("best: alpha0=%g gamma=%d tau=%d", best.alpha0, best.gamma, best.tau)


def cmd_evaluate(args):
    header = io.read_header(args.original)
    if header == io.QTS_HEADER:
        original = io.read_qts_csv(args.original)
        synthetic = io.read_qts_csv(args.synthetic)
        fpca = QtsFPCA().fit(original)
        F, G = fpca.scores_, fpca.transform(synthetic)
    else:
        _, F = io.read_scores_csv(args.original)
        _, G = io.read_scores_csv(args.synthetic)
        if F.shape[1] != G.shape[1]:
            raise InvalidConfig("score files have different column counts")
    paired = not args.unpaired
    if paired and F.shape != G.shape:
        raise InvalidConfig("paired evaluation needs the same number of rows; pass --unpaired")
    report = evaluate(F, G, paired=paired, k_range=_k_range(args, F.shape[0]))
    os.makedirs(args.out, exist_ok=True)
    io.write_json(report.to_dict(), os.path.join(args.out, "report.json"))
    io.write_plotdata_frobenius(report, os.path.join(args.out, "plotdata_frobenius.csv"), "evaluated")


def cmd_demo_data(args):
    if args.n < 3:
        raise InvalidConfig("demo data needs --n >= 3")
    os.makedirs(args.out, exist_ok=True)
    io.write_qts_csv(generate_demo_sample(args.n, args.seed), os.path.join(args.out, "demo_qts.csv"))


COMMANDS = {
    "synthesize": cmd_synthesize,
    "tune": cmd_tune,
    "evaluate": cmd_evaluate,
    "copula": cmd_copula,
    "demo-data": cmd_demo_data,
}


def _fail(kind, message, code):
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail("UsageError", str(exc), EXIT_USAGE)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        COMMANDS[args.command](args)
    except InvalidConfig as exc:
        return _fail("UsageError", str(exc), EXIT_USAGE)
    except SynGaitError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_DOMAIN)
    except OSError as exc:
        return _fail("IoError", str(exc), EXIT_DOMAIN)
    return 0


if __name__ == "__main__":
    sys.exit(main())

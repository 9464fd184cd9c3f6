"""Command-line interface.

Exit codes: 0 success, 1 invalid input, 2 usage error. Data goes to
``--output`` (stdout by default); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from memdecay import analysis, io, metrics
from memdecay._accel import backend
from memdecay.core import STUDIED_LAG_RANGE, FitConfig, score_at_lag
from memdecay.errors import MemDecayError
from memdecay.fitting import fit_all
from memdecay.simulate import Dist, SimSpec, simulate_dataset

log = logging.getLogger("memdecay")

GLOBAL_DEFAULTS = {"seed": None, "ref_lag": 80, "iterations": 10, "tol": 0.0, "output": "-"}


def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand without
    # the subparser clobbering a value given at the top level.
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="RNG seed (printed when chosen automatically)")
    g.add_argument("--ref-lag", type=int, default=argparse.SUPPRESS, help="reference lag T (default 80)")
    g.add_argument("--iterations", type=int, default=argparse.SUPPRESS, help="fit passes, or the cap when --tol > 0 (default 10)")
    g.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="stop once parameters settle below this (default 0: fixed passes)")
    g.add_argument("-o", "--output", default=argparse.SUPPRESS, help="output path, '-' for stdout (default)")
    g.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS, help="log debug details")
    return p


def _lags(text: str) -> list[int]:
    try:
        lags = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not lags:
        raise argparse.ArgumentTypeError("no lags given")
    return lags


def _dist(text: str) -> Dist:
    try:
        return Dist.parse(text)
    except MemDecayError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(
        prog="memdecay",
        description="Fit, evaluate, simulate and analyse per-video memory decay curves.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_text):
        return sub.add_parser(name, help=help_text, description=help_text, parents=[common])

    columns_help = "map canonical columns to source columns, e.g. video_id=clip,participant_id=worker"

    p = add("ingest-check", "validate an annotation CSV and print a summary")
    p.add_argument("annotations")
    p.add_argument("--columns", help=columns_help)

    p = add("fit", "fit a decay curve per video and write a score file")
    p.add_argument("annotations")
    p.add_argument("--columns", help=columns_help)
    p.add_argument("--alpha-init", type=float, default=-5e-4)

    p = add("score-at", "evaluate every fitted curve at one lag")
    p.add_argument("scores")
    p.add_argument("--lag", type=int, required=True)
    p.add_argument("--clamp", action="store_true", help="truncate scores into [0, 1]")

    p = add("consistency", "split-half human consistency of raw hit-rate rankings")
    p.add_argument("annotations")
    p.add_argument("--columns", help=columns_help)
    p.add_argument("--splits", type=int, default=25)

    p = add("evaluate", "compare predicted curves against ground-truth curves")
    p.add_argument("truth")
    p.add_argument("pred")
    p.add_argument("--lags", type=_lags, default=list(metrics.DEFAULT_EVAL_LAGS), help="R^2 lags (default 40,80,160)")

    p = add("simulate", "generate a synthetic annotation file and its true curves")
    p.add_argument("--truth-output", required=True, help="where to write the true curves (score file)")
    p.add_argument("--n-videos", type=int, default=200)
    p.add_argument("--annotations-per-video", type=int, default=90)
    p.add_argument("--participants", type=int, default=200)
    p.add_argument("--lag-lo", type=int, default=9)
    p.add_argument("--lag-hi", type=int, default=200)
    p.add_argument("--m80", type=_dist, default=Dist("uniform", (0.5, 0.95)), help="e.g. uniform:0.5,0.95 or const:0.8")
    p.add_argument("--alpha", type=_dist, default=Dist("uniform", (-1e-3, 0.0)), help="e.g. uniform:-0.001,0 or list:-0.001,0")

    p = add("analyze-deciles", "hit rate vs lag for memorability quantile groups")
    p.add_argument("annotations")
    p.add_argument("scores")
    p.add_argument("--columns", help=columns_help)
    p.add_argument("--groups", type=int, default=10)
    p.add_argument("--lag-bins", type=int, default=20)

    p = add("analyze-trend", "linear vs log-linear fit of pooled hit rate against lag")
    p.add_argument("annotations")
    p.add_argument("--columns", help=columns_help)
    p.add_argument("--lag-bins", type=int, default=20)
    return parser


def _effective_seed(args) -> int:
    seed = args.seed
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (2**32))
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _fit_config(args, alpha_init=-5e-4) -> FitConfig:
    return FitConfig(ref_lag=args.ref_lag, alpha_init=alpha_init, iterations=args.iterations, convergence_tol=args.tol)


def _write_json(target, obj) -> None:
    with io._sink(target) as fh:
        fh.write(json.dumps(obj, indent=2) + "\n")


def cmd_ingest_check(args):
    annotations = io.ingest(args.annotations, io.parse_column_map(args.columns))
    summary = annotations.summary()
    summary["format_version"] = io.FORMAT_VERSION
    summary["sha256"] = io.file_digest(args.annotations)
    _write_json(args.output, summary)


def cmd_fit(args):
    annotations = io.ingest(args.annotations, io.parse_column_map(args.columns))
    cfg = _fit_config(args, args.alpha_init)
    table = fit_all(annotations, cfg, source_digest=io.file_digest(args.annotations))
    log.info("fitted %d videos (backend=%s)", len(table), backend())
    io.write_scores(args.output, table)


def cmd_score_at(args):
    if args.lag < 1:
        raise MemDecayError(f"--lag must be >= 1, got {args.lag}")
    table = io.read_scores(args.scores)
    lo, hi = STUDIED_LAG_RANGE
    if not lo <= args.lag <= hi:
        log.warning("lag %d is outside the studied range %d..%d; extrapolating", args.lag, lo, hi)
    rows = ((vid, args.lag, score_at_lag(c, args.lag, args.clamp)) for vid, c in table.curves)
    io.write_table(args.output, ("video_id", "lag", "score"), rows, {"clamp": "true" if args.clamp else "false"})


def cmd_consistency(args):
    seed = _effective_seed(args)
    annotations = io.ingest(args.annotations, io.parse_column_map(args.columns))
    report = metrics.split_half_consistency(annotations, n_splits=args.splits, seed=seed)
    _write_json(args.output, report.to_dict())


def cmd_evaluate(args):
    truth = io.read_scores(args.truth)
    pred = io.read_scores(args.pred)
    report = metrics.evaluate_predictions(truth, pred, args.lags, score_lag=args.ref_lag)
    if report.extrapolated_lags:
        log.warning("lags outside the studied range: %s", ", ".join(map(str, report.extrapolated_lags)))
    _write_json(args.output, report.to_dict())


def cmd_simulate(args):
    seed = _effective_seed(args)
    spec = SimSpec(
        n_videos=args.n_videos,
        annotations_per_video=args.annotations_per_video,
        lag_lo=args.lag_lo,
        lag_hi=args.lag_hi,
        m80_dist=args.m80,
        alpha_dist=args.alpha,
        seed=seed,
        n_participants=args.participants,
        ref_lag=args.ref_lag,
    )
    result = simulate_dataset(spec)
    io.write_annotations(args.output, result.records)
    io.write_scores(args.truth_output, result.truth)
    log.info("simulated %d records for %d videos", len(result.records), spec.n_videos)


def cmd_analyze_deciles(args):
    annotations = io.ingest(args.annotations, io.parse_column_map(args.columns))
    scores = io.read_scores(args.scores)
    table = analysis.decile_curves(annotations, scores, args.groups, args.lag_bins)
    io.write_table(args.output, ("group", "lag_bin_center", "mean_hit_rate", "n"), table.rows(), table.metadata)


def cmd_analyze_trend(args):
    annotations = io.ingest(args.annotations, io.parse_column_map(args.columns))
    result = analysis.compare_trend_fits(annotations, args.lag_bins)
    meta = {"r_linear": repr(result.r_linear), "r_loglinear": repr(result.r_loglinear), "lag_bins": args.lag_bins}
    rows = ((c, m, n) for _, c, m, n in result.table.rows())
    io.write_table(args.output, ("lag_bin_center", "mean_hit_rate", "n"), rows, meta)


COMMANDS = {
    "ingest-check": cmd_ingest_check,
    "fit": cmd_fit,
    "score-at": cmd_score_at,
    "consistency": cmd_consistency,
    "evaluate": cmd_evaluate,
    "simulate": cmd_simulate,
    "analyze-deciles": cmd_analyze_deciles,
    "analyze-trend": cmd_analyze_trend,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        if args.ref_lag < 1:
            raise MemDecayError(f"--ref-lag must be >= 1, got {args.ref_lag}")
        COMMANDS[args.command](args)
    except (MemDecayError, OSError) as exc:
        print(f"memdecay {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

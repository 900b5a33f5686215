"""Command-line interface: ``galileo {fit,gen,scaling,report}``."""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time
from pathlib import Path

from .anneal import CRITERIA, AnnealConfig, anneal
from .density import CARTESIAN, ENTROPY, weighted_average_density
from .em import STARVED_FRACTION, EmConfig
from .errors import GalileoError
from .io import (IngestConfig, load_csv, load_model, read_assignments, save_csv, save_model,
                 write_assignments, write_trace)
from .model import ClusterAssignment
from .report import contingency, summary_rows, to_csv, to_text
from .scaling import DEFAULT_SIZES, loglog_slope, run_scaling
from .selection import category_utility
from .synth import SynthSpec, generate

MODEL_FILE = "model.json"
ASSIGN_FILE = "assignments.csv"
TRACE_FILE = "trace.csv"


class DataError(Exception):
    """Raised for problems with input files; mapped to exit status 1."""


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg_float(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text}")
    return v


def _beta(text):
    v = float(text)
    if not v >= 1:
        raise argparse.ArgumentTypeError("beta must be >= 1")
    return v


def _bins(text):
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError("--bins must be >= 2")
    return v


def _int_list(text):
    try:
        vals = [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("sizes must be positive")
    return vals


def _common_model_flags(p):
    p.add_argument("--kmax", type=_positive_int, default=10)
    p.add_argument("--beta", type=_beta, default=1.0)
    p.add_argument("--criterion", choices=CRITERIA, default="density")
    p.add_argument("--prune-metric", choices=(ENTROPY, CARTESIAN), default=ENTROPY)
    p.add_argument("--smoothing", type=_nonneg_float, default=None,
                   help="absolute pseudo-count per value (default: 1e-9 x component size)")
    p.add_argument("--max-iters", type=_positive_int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)


def _data_flags(p, required=True):
    p.add_argument("--data", required=required)
    p.add_argument("--label-col", default=None)
    p.add_argument("--missing", choices=("category", "drop"), default="category")
    p.add_argument("--bins", type=_bins, default=None,
                   help="equal-frequency bins for numeric columns")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="galileo",
                                     description="Categorical mixture clustering by density annealing.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="anneal a mixture model on a CSV file")
    _data_flags(p)
    _common_model_flags(p)
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("gen", help="write a rule-based synthetic dataset")
    p.add_argument("--records", type=_positive_int, default=10_000)
    p.add_argument("--attributes", type=_positive_int, default=10)
    p.add_argument("--cardinality", type=_positive_int, default=20)
    p.add_argument("--rules", type=_positive_int, default=5)
    p.add_argument("--conformance", type=float, default=0.97)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("scaling", help="time full anneals on synthetic data of growing size")
    p.add_argument("--sizes", type=_int_list, default=list(DEFAULT_SIZES))
    p.add_argument("--repeats", type=_positive_int, default=3)
    _common_model_flags(p)
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("report", help="contingency tables and summary for a previous fit")
    _data_flags(p)
    p.add_argument("--fit-dir", default=None, help="directory holding the fit outputs (default: --out-dir)")
    p.add_argument("--out-dir", default=".")
    return parser


def _load(args):
    cfg = IngestConfig(label_column=args.label_col, missing_policy=args.missing,
                       numeric_bins=args.bins)
    try:
        return load_csv(args.data, cfg)
    except GalileoError as exc:
        raise DataError(str(exc)) from exc


def _anneal_config(args) -> AnnealConfig:
    em = EmConfig(max_iterations=args.max_iters, rel_tolerance=args.tol,
                  smoothing=args.smoothing, threads=args.threads)
    return AnnealConfig(kmax=args.kmax, beta=args.beta, prune_metric=args.prune_metric,
                        criterion=args.criterion, seed=args.seed, em=em)


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_fit(args) -> int:
    dataset, labels = _load(args)
    config = _anneal_config(args)
    t0 = time.perf_counter()
    result = anneal(dataset, config)
    elapsed = time.perf_counter() - t0
    level = result.trace.level(result.k)

    out = _out_dir(args.out_dir)
    save_model(result.model, out / MODEL_FILE, result.trace)
    write_assignments(result.assignment, out / ASSIGN_FILE)
    write_trace(result.trace, out / TRACE_FILE)

    print(f"k*       {result.k}")
    print(f"logL     {level.log_likelihood:.6f}")
    print(f"AIC      {level.aic:.6f}")
    print(f"BIC      {level.bic:.6f}")
    print(f"rho_bar  {level.mean_density:.6f}")
    if labels is not None:
        print(f"CU       {category_utility(result.assignment, dataset):.6f}")
    print(f"time     {elapsed:.3f}s")
    return 0


def cmd_gen(args) -> int:
    try:
        spec = SynthSpec(args.records, args.attributes, args.cardinality, args.rules,
                         args.conformance, args.seed)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    dataset, labels = generate(spec)
    out = _out_dir(args.out_dir)
    save_csv(dataset, out / "synth.csv")
    with open(out / "synth_labels.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["record", "rule"])
        w.writerows(enumerate(labels.tolist()))
    print(f"wrote {dataset.n_records} records to {out / 'synth.csv'}")
    return 0


def cmd_scaling(args) -> int:
    config = _anneal_config(args)
    out = _out_dir(args.out_dir)

    def progress(t):
        print(f"N={t.n:<9d} median={t.median:.4f}s spread={t.spread:.1%}", flush=True)

    timings = run_scaling(args.sizes, config, SynthSpec(1, seed=args.seed), args.repeats, progress)
    rows = [["n", "median_seconds", *[f"run{i}" for i in range(args.repeats)]]]
    rows += [[t.n, repr(t.median), *map(repr, t.runs)] for t in timings]
    to_csv(rows, out / "scaling.csv")
    if sum(t.n >= 1_000 for t in timings) >= 2:
        print(f"log-log slope (N >= 1000) {loglog_slope(timings):.3f}")
    else:
        print("log-log slope needs two sizes with N >= 1000")
    return 0


def cmd_report(args) -> int:
    dataset, labels = _load(args)
    fit_dir = Path(args.fit_dir or args.out_dir)
    try:
        model = load_model(fit_dir / MODEL_FILE)
        hard = read_assignments(fit_dir / ASSIGN_FILE)
    except GalileoError as exc:
        raise DataError(str(exc)) from exc
    if hard.size != dataset.n_records or (hard.size and hard.max() >= model.k):
        raise DataError("assignments do not match the dataset or model")
    if model.schema.cardinalities.tolist() != dataset.schema.cardinalities.tolist():
        raise DataError("model schema does not match the dataset")

    assignment = ClusterAssignment(hard, model.k)
    table = contingency(hard, labels, dataset.weights, model.k)
    cu = category_utility(assignment, dataset)
    rho = weighted_average_density(model, STARVED_FRACTION * dataset.total_weight)
    summary = summary_rows(Path(args.data).stem, int(table.clusters.size), cu, rho)

    out = _out_dir(args.out_dir)
    to_csv(table.rows(), out / "contingency.csv")
    to_csv(summary, out / "summary.csv")
    text = to_text(table.rows()) + "\n" + to_text(summary)
    (out / "report.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


COMMANDS = {"fit": cmd_fit, "gen": cmd_gen, "scaling": cmd_scaling, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "tol", 1.0) <= 0:
        parser.error("--tol must be positive")
    if getattr(args, "command", None) == "gen" and not 0 < args.conformance <= 1:
        parser.error("--conformance must lie in (0, 1]")
    try:
        return COMMANDS[args.command](args)
    except DataError as exc:
        print(f"galileo: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

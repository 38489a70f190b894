"""Command-line interface: simulate, train, predict, tune, benchmark.

Exit codes: 0 success, 2 usage error (argparse), 3 I/O error, 4 input
validation error, 5 infeasible configuration (table search, split, sampling).
All commands are deterministic for a fixed --seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from .baseline import ConvergenceError
from .benchmark import (
    BenchmarkConfig,
    run_benchmark,
    summarize,
    write_rows,
    write_summary,
)
from .data import DEFAULT_PHENO_COL, load_dataset, write_dataset
from .engine import HyperParams, enumerate_and_rank
from .errors import InfeasibilityError, ValidationError
from .predictor import (
    load_model,
    predict_class,
    predict_proba,
    risk_score,
    save_model,
    train_classifier,
)
from .simulate import build_scenario, simulate_dataset
from .tuner import SearchSpace, auc, tune

EXIT_OK = 0
EXIT_IO = 3
EXIT_VALIDATION = 4
EXIT_INFEASIBLE = 5

logger = logging.getLogger("mbmdr")


def _maf_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _add_common(p):
    p.add_argument("--seed", type=int, default=0, help="root random seed")
    p.add_argument("--verbose", "-v", action="count", default=0,
                   help="-v info, -vv debug (logs go to stderr)")


def _add_levels_flag(p):
    p.add_argument("--levels", type=int, default=None,
                   help="level count for every feature (default: inferred"
                        " as max observed level + 1)")


def _add_hyper_flags(p):
    p.add_argument("--order", type=int, default=2, choices=(1, 2))
    p.add_argument("--order-range", action="store_true",
                   help="enumerate every order up to --order")
    p.add_argument("--adjustment", default="NONE", choices=("NONE", "CODOMINANT"))
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--min-cell-size", type=int, default=10)
    p.add_argument("--o-as-na", action="store_true",
                   help="skip O cells when averaging probabilities")
    p.add_argument("--s", type=int, default=10, help="number of top models kept")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbmdr",
        description="MDR-based interaction detection, prediction and benchmarking"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write simulated benchmark datasets")
    p.add_argument("--scenario", type=int, required=True,
                   help="0 (pure noise) or 1-8 (benchmark scenarios)")
    p.add_argument("--maf", type=_maf_list, default=None,
                   help="effect-SNP MAFs, comma separated, in component order")
    p.add_argument("--h2", type=float, default=0.1,
                   help="per-component heritability")
    p.add_argument("--n", type=int, required=True, help="samples per dataset")
    p.add_argument("--q", type=int, default=100, help="total SNP count")
    p.add_argument("--reps", type=int, default=1, help="number of datasets")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--prefix", default="scenario", help="output file prefix")
    _add_common(p)

    p = sub.add_parser("train", help="train a classifier on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=("csv", "tsv"), default=None)
    p.add_argument("--pheno-col", default=DEFAULT_PHENO_COL)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--report", default=None,
                   help="CSV listing the top 20 ranked models")
    _add_levels_flag(p)
    p.add_argument("--tune", action="store_true",
                   help="select hyperparameters by CV before training")
    p.add_argument("--budget", type=int, default=30, help="tuning trials")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--trace", default=None, help="tuning trace CSV")
    _add_hyper_flags(p)
    _add_common(p)

    p = sub.add_parser("predict", help="score a dataset with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=("csv", "tsv"), default=None)
    p.add_argument("--pheno-col", default=DEFAULT_PHENO_COL)
    p.add_argument("--out", required=True, help="predictions CSV")
    p.add_argument("--auc", action="store_true",
                   help="print AUC against the phenotype column")
    _add_common(p)

    p = sub.add_parser("tune", help="hyperparameter search only")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=("csv", "tsv"), default=None)
    p.add_argument("--pheno-col", default=DEFAULT_PHENO_COL)
    _add_levels_flag(p)
    p.add_argument("--budget", type=int, default=30)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--out", default=None, help="write best hyperparameters as JSON")
    p.add_argument("--trace", default=None, help="tuning trace CSV")
    p.add_argument("--threads", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("benchmark", help="replicated simulate/tune/evaluate run")
    p.add_argument("--scenario", type=int, required=True)
    p.add_argument("--maf", type=_maf_list, default=None)
    p.add_argument("--h2", type=float, default=0.1)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, default=100)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--budget", type=int, default=30)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("MBMDR_THREADS", os.cpu_count() or 1)))
    p.add_argument("--out", required=True, help="raw per-replicate CSV")
    p.add_argument("--summary", default=None, help="aggregated CSV")
    _add_common(p)

    return parser


def cmd_simulate(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    for rep in range(args.reps):
        seed = int(np.random.SeedSequence((args.seed, rep)).generate_state(1)[0])
        spec = build_scenario(args.scenario, args.maf, args.h2, args.n,
                              q=args.q, seed=seed)
        ds, manifest = simulate_dataset(spec, with_manifest=True)
        stem = f"{args.prefix}{args.scenario}_rep{rep}"
        data_path = os.path.join(args.out, stem + ".csv")
        write_dataset(ds, data_path)
        manifest["replicate"] = rep
        manifest["root_seed"] = args.seed
        manifest["data_file"] = os.path.basename(data_path)
        with open(os.path.join(args.out, stem + ".manifest.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=1)
            fh.write("\n")
        logger.info("wrote %s (n=%d, q=%d)", data_path, ds.n, ds.q)
    return EXIT_OK


def _write_ranking_report(ranking, path, top=20):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "features", "statistic"])
        for i, m in enumerate(ranking.models[:top], start=1):
            writer.writerow([i, " ".join(str(j) for j in m.tuple), repr(m.statistic)])


def cmd_train(args) -> int:
    ds = load_dataset(args.data, fmt=args.format, pheno_col=args.pheno_col,
                      levels=args.levels)
    if args.tune:
        result = tune(ds, SearchSpace(), budget=args.budget, k=args.folds,
                      seed=args.seed, trace_path=args.trace)
        hp = result.best
        logger.info("tuned hyperparameters %s (cv auc %.4f)", hp, result.cv_auc)
    else:
        hp = HyperParams(order=args.order, order_range=args.order_range,
                         adjustment=args.adjustment, alpha=args.alpha,
                         min_cell_size=args.min_cell_size, o_as_na=args.o_as_na,
                         s=args.s)
    ranking = enumerate_and_rank(ds, hp)
    clf = train_classifier(ds, hp, ranking=ranking)
    save_model(clf, args.out)
    if args.report:
        _write_ranking_report(ranking, args.report)
    logger.info("ranked %d models, wrote the top %d to %s",
                len(ranking.models), clf.s, args.out)
    return EXIT_OK


def cmd_predict(args) -> int:
    clf = load_model(args.model)
    ds = load_dataset(args.data, fmt=args.format, pheno_col=args.pheno_col)
    if ds.feature_names != clf.feature_names:
        raise ValidationError(
            "feature names in the dataset do not match the model"
            f" (model has {len(clf.feature_names)}, data has {len(ds.feature_names)})"
        )
    proba = predict_proba(clf, ds.genotypes)
    cls = predict_class(clf, ds.genotypes)
    score = risk_score(clf, ds.genotypes)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample_id", "proba", "class", "score"])
        for sid, p, c, r in zip(ds.sample_ids, proba, cls, score):
            writer.writerow([sid, repr(float(p)), int(c), int(r)])
    if args.auc:
        value = auc(proba, ds.phenotype)
        print(f"AUC {value:.6f}")
    logger.info("wrote predictions for %d samples to %s", ds.n, args.out)
    return EXIT_OK


def cmd_tune(args) -> int:
    ds = load_dataset(args.data, fmt=args.format, pheno_col=args.pheno_col,
                      levels=args.levels)
    result = tune(ds, SearchSpace(), budget=args.budget, k=args.folds,
                  seed=args.seed, trace_path=args.trace, n_jobs=args.threads)
    doc = {"best": result.best.to_dict(), "cv_auc": result.cv_auc,
           "seed": result.seed, "trials": len(result.trials)}
    print(json.dumps(doc, indent=1))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    mafs = args.maf
    if mafs is None:
        mafs = []
    cfg = BenchmarkConfig(scenario=args.scenario, mafs=tuple(mafs), h2=args.h2,
                          n=args.n, replicates=args.reps, budget=args.budget,
                          folds=args.folds, seed=args.seed, q=args.q)
    # validate the scenario/maf combination before spending replicate time
    build_scenario(cfg.scenario, list(cfg.mafs), cfg.h2, cfg.n, q=cfg.q, seed=0)
    rows = run_benchmark(cfg, threads=args.threads)
    write_rows(rows, args.out)
    summary = summarize(rows)
    if args.summary:
        write_summary(summary, args.summary)
    for row in summary:
        print(f"scenario {row['scenario']} maf {row['mafs']} h2 {row['h2']}"
              f" n {row['n']} {row['algorithm']}:"
              f" median AUC {row['auc_median']:.4f}"
              f" (q25 {row['auc_q25']:.4f}, q75 {row['auc_q75']:.4f},"
              f" {row['replicates']} ok, {row['failed']} failed)")
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "train": cmd_train,
    "predict": cmd_predict,
    "tune": cmd_tune,
    "benchmark": cmd_benchmark,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except InfeasibilityError as exc:
        logger.error("infeasible: %s", exc)
        return EXIT_INFEASIBLE
    except (ValidationError, ValueError, ConvergenceError) as exc:
        logger.error("invalid input: %s", exc)
        return EXIT_VALIDATION
    except OSError as exc:
        logger.error("i/o error: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

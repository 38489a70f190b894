"""Replicated benchmark harness: simulate, split, tune, fit, evaluate.

Per replicate one dataset is simulated and split 50/50 (stratified) into a
tuning half and an evaluation half; the tuned MDR classifier and the ridge
logistic baseline are both fit on the first half and scored by AUC on the
second. Replicate seeds derive from the root seed alone, so results are
identical for any worker count, and the summary statistics are recomputed
from the raw rows.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baseline import fit_logistic, predict_logistic, select_l2
from .data import GenotypeDataset, stratified_kfold
from .predictor import predict_proba, train_classifier
from .simulate import ScenarioSpec, build_scenario, simulate_dataset
from .tuner import SearchSpace, auc, tune

ALGO_MBMDR = "MBMDRC"
ALGO_BASELINE = "LOGIT"


@dataclass(frozen=True)
class BenchmarkRow:
    scenario: int
    mafs: str
    h2: float
    n: int
    replicate: int
    algorithm: str
    auc: float
    error: str = ""


@dataclass(frozen=True)
class BenchmarkConfig:
    scenario: int
    mafs: tuple[float, ...]
    h2: float
    n: int
    replicates: int
    budget: int = 30
    folds: int = 5
    seed: int = 0
    q: int = 100
    space: SearchSpace = SearchSpace()


def split_half(ds: GenotypeDataset, seed: int):
    """Stratified 50/50 split into (tuning half, evaluation half)."""
    folds = stratified_kfold(ds, 2, seed)
    d2_idx, d1_idx = folds.train_test(0)
    return ds.subset(d1_idx), ds.subset(d2_idx)


def _replicate_seeds(root_seed: int, replicate: int) -> tuple[int, int, int]:
    ss = np.random.SeedSequence((root_seed, replicate))
    sim, split, tune_seed = (int(v) for v in ss.generate_state(3))
    return sim, split, tune_seed


def run_replicate(cfg: BenchmarkConfig, replicate: int) -> list[BenchmarkRow]:
    """Simulate one dataset, benchmark both algorithms on it."""
    sim_seed, split_seed, tune_seed = _replicate_seeds(cfg.seed, replicate)
    maf_str = ",".join(f"{m:g}" for m in cfg.mafs)
    meta = dict(scenario=cfg.scenario, mafs=maf_str, h2=cfg.h2, n=cfg.n,
                replicate=replicate)
    rows = []
    try:
        spec = build_scenario(cfg.scenario, list(cfg.mafs), cfg.h2, cfg.n,
                              q=cfg.q, seed=sim_seed)
        ds = simulate_dataset(spec)
        d1, d2 = split_half(ds, split_seed)
    except Exception as exc:  # simulation infeasible: both algorithms fail
        for algo in (ALGO_MBMDR, ALGO_BASELINE):
            rows.append(BenchmarkRow(**meta, algorithm=algo, auc=float("nan"),
                                     error=str(exc)))
        return rows

    try:
        result = tune(d1, cfg.space, budget=cfg.budget, k=cfg.folds, seed=tune_seed)
        clf = train_classifier(d1, result.best)
        a = _eval_auc(predict_proba(clf, d2.genotypes), d2)
        rows.append(BenchmarkRow(**meta, algorithm=ALGO_MBMDR, auc=a))
    except Exception as exc:
        rows.append(BenchmarkRow(**meta, algorithm=ALGO_MBMDR, auc=float("nan"),
                                 error=str(exc)))
    try:
        l2 = select_l2(d1, k=cfg.folds, seed=tune_seed)
        model = fit_logistic(d1, l2)
        a = _eval_auc(predict_logistic(model, d2.genotypes), d2)
        rows.append(BenchmarkRow(**meta, algorithm=ALGO_BASELINE, auc=a))
    except Exception as exc:
        rows.append(BenchmarkRow(**meta, algorithm=ALGO_BASELINE, auc=float("nan"),
                                 error=str(exc)))
    return rows


def _eval_auc(scores, ds: GenotypeDataset) -> float:
    return auc(scores, ds.phenotype)


def run_benchmark(cfg: BenchmarkConfig, threads: int = 1) -> list[BenchmarkRow]:
    """All replicates; results are independent of the worker count."""
    if threads > 1 and cfg.replicates > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(run_replicate, [cfg] * cfg.replicates,
                                   range(cfg.replicates)))
    else:
        chunks = [run_replicate(cfg, r) for r in range(cfg.replicates)]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r.replicate, r.algorithm))
    return rows


def write_rows(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["scenario", "mafs", "h2", "n", "replicate", "algorithm",
                         "auc", "error"])
        for r in rows:
            writer.writerow([r.scenario, r.mafs, repr(r.h2), r.n, r.replicate,
                             r.algorithm, repr(r.auc), r.error])


def summarize(rows) -> list[dict]:
    """Median and quartiles per (scenario, mafs, h2, n, algorithm) group."""
    groups: dict[tuple, list[float]] = {}
    failed: dict[tuple, int] = {}
    for r in rows:
        key = (r.scenario, r.mafs, r.h2, r.n, r.algorithm)
        groups.setdefault(key, [])
        failed.setdefault(key, 0)
        if np.isfinite(r.auc):
            groups[key].append(r.auc)
        else:
            failed[key] += 1
    out = []
    for key in sorted(groups):
        vals = groups[key]
        scenario, mafs, h2, n, algorithm = key
        if vals:
            q25, q50, q75 = (float(v) for v in np.percentile(vals, [25, 50, 75]))
        else:
            q25 = q50 = q75 = float("nan")
        out.append({
            "scenario": scenario, "mafs": mafs, "h2": h2, "n": n,
            "algorithm": algorithm, "replicates": len(vals),
            "failed": failed[key],
            "auc_q25": q25, "auc_median": q50, "auc_q75": q75,
        })
    return out


def write_summary(summary, path) -> None:
    fields = ["scenario", "mafs", "h2", "n", "algorithm", "replicates", "failed",
              "auc_q25", "auc_median", "auc_q75"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for row in summary:
            writer.writerow([repr(row[f]) if isinstance(row[f], float) else row[f]
                             for f in fields])

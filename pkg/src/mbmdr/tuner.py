"""Cross-validated random search over the MDR hyperparameter space.

Each trial draws hyperparameters uniformly (log-uniformly for alpha),
evaluates them by stratified k-fold AUC and the draw with the best mean
CV AUC wins, ties going to the earlier trial. Failed trials record a missing
AUC and are never selected. Everything is reproducible from the seed.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .data import GenotypeDataset, stratified_kfold
from .engine import HyperParams
from .predictor import predict_proba, train_classifier


@dataclass(frozen=True)
class SearchSpace:
    """Hyperparameter ranges for random search (the tuned MDR space)."""

    order: tuple[int, ...] = (1, 2)
    order_range: tuple[bool, ...] = (False, True)
    adjustment: tuple[str, ...] = ("NONE", "CODOMINANT")
    alpha_bounds: tuple[float, float] = (0.01, 1.0)
    min_cell_size_bounds: tuple[int, int] = (0, 50)
    o_as_na: tuple[bool, ...] = (False, True)
    s_grid: tuple[int, ...] = (1, 2, 5, 10, 20, 50, 100)

    def draw(self, rng: np.random.Generator) -> HyperParams:
        lo, hi = self.alpha_bounds
        return HyperParams(
            order=int(rng.choice(self.order)),
            order_range=bool(rng.choice(self.order_range)),
            adjustment=str(rng.choice(self.adjustment)),
            alpha=float(np.exp(rng.uniform(np.log(lo), np.log(hi)))),
            min_cell_size=int(rng.integers(self.min_cell_size_bounds[0],
                                           self.min_cell_size_bounds[1] + 1)),
            o_as_na=bool(rng.choice(self.o_as_na)),
            s=int(rng.choice(self.s_grid)),
        )


@dataclass(frozen=True)
class Trial:
    index: int
    hyperparams: HyperParams
    fold_aucs: tuple[float, ...]
    fold_seconds: tuple[float, ...]

    @property
    def mean_auc(self) -> float:
        return float(np.mean(self.fold_aucs))


@dataclass(frozen=True)
class TuneResult:
    best: HyperParams
    cv_auc: float
    trials: tuple[Trial, ...]
    seed: int


def auc(scores, labels) -> float:
    """Mann-Whitney AUC: fraction of case-control pairs ranked correctly, ties half.

    Computed from average ranks, which is exactly the pair-counting form.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-d and equally long")
    if not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0/1")
    n_pos = int((labels == 1).sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined without both cases and controls")
    ranks = rankdata(scores)
    return float((ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def cv_fold_auc(ds: GenotypeDataset, hp: HyperParams, train_idx, test_idx) -> float:
    """Train on one fold complement and score the held-out fold by AUC."""
    clf = train_classifier(ds.subset(train_idx), hp)
    test = ds.subset(test_idx)
    return auc(predict_proba(clf, test.genotypes), test.phenotype)


def _run_trial(ds: GenotypeDataset, hp: HyperParams, folds, index: int) -> Trial:
    fold_aucs = []
    fold_seconds = []
    for fold in range(folds.k):
        train_idx, test_idx = folds.train_test(fold)
        t0 = time.perf_counter()
        try:
            a = cv_fold_auc(ds, hp, train_idx, test_idx)
        except Exception:
            a = float("nan")
        fold_seconds.append(time.perf_counter() - t0)
        fold_aucs.append(a)
    return Trial(index, hp, tuple(fold_aucs), tuple(fold_seconds))


def write_trace(trials, path) -> None:
    """Tuning trace CSV: one row per (trial, fold)."""
    hp_fields = ("order", "order_range", "adjustment", "alpha",
                 "min_cell_size", "o_as_na", "s")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["trial", "fold", *hp_fields, "fold_auc", "seconds"])
        for t in trials:
            hp = t.hyperparams.to_dict()
            for fold, (a, sec) in enumerate(zip(t.fold_aucs, t.fold_seconds)):
                writer.writerow([t.index, fold, *[hp[f] for f in hp_fields],
                                 repr(a), f"{sec:.3f}"])


def tune(ds: GenotypeDataset, space: SearchSpace, budget: int, k: int, seed: int,
         trace_path=None, n_jobs: int = 1) -> TuneResult:
    """Random-search hyperparameters with stratified k-fold CV selection by AUC."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    folds = stratified_kfold(ds, k, seed)
    rng = np.random.default_rng(seed)
    draws = [space.draw(rng) for _ in range(budget)]
    if n_jobs > 1 and budget > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            trials = list(pool.map(_run_trial, [ds] * budget, draws,
                                   [folds] * budget, range(budget)))
    else:
        trials = [_run_trial(ds, hp, folds, i) for i, hp in enumerate(draws)]
    trials.sort(key=lambda t: t.index)
    if trace_path is not None:
        write_trace(trials, trace_path)
    means = np.array([t.mean_auc for t in trials])
    if np.isnan(means).all():
        raise RuntimeError("every tuning trial failed")
    best_idx = int(np.nanargmax(means))
    return TuneResult(best=trials[best_idx].hyperparams,
                      cv_auc=float(means[best_idx]),
                      trials=tuple(trials), seed=seed)

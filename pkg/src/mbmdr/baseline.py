"""Main-effects ridge logistic regression, the no-interactions comparator.

Features enter with additive 0/1/2 coding and main effects only, so the
model can capture marginal signal but is structurally blind to pure
interactions. The ridge penalty is selected by the same stratified CV / AUC
harness used for the MDR tuner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import MISSING, GenotypeDataset, stratified_kfold
from .errors import ValidationError
from .tuner import auc

DEFAULT_L2_GRID = (0.0, 0.01, 0.1, 1.0, 10.0)

MAX_ITER = 100
TOL = 1e-8


class ConvergenceError(RuntimeError):
    """IRLS did not converge; carries the last iterate."""

    def __init__(self, message, intercept, coefficients):
        super().__init__(message)
        self.intercept = intercept
        self.coefficients = coefficients


@dataclass(frozen=True)
class LogisticModel:
    intercept: float
    coefficients: np.ndarray
    l2_penalty: float


def fit_logistic(ds: GenotypeDataset, l2: float = 0.0) -> LogisticModel:
    """IRLS fit with an L2 penalty on the coefficients (intercept unpenalized)."""
    if l2 < 0:
        raise ValueError("l2 penalty must be >= 0")
    if (ds.genotypes == MISSING).any():
        raise ValidationError("baseline logistic requires complete data")
    X = np.column_stack([np.ones(ds.n), ds.genotypes.astype(np.float64)])
    y = ds.phenotype.astype(np.float64)
    penalty = np.full(X.shape[1], l2)
    penalty[0] = 0.0
    beta = np.zeros(X.shape[1])
    for _ in range(MAX_ITER):
        eta = X @ beta
        mu = 1.0 / (1.0 + np.exp(-eta))
        w = mu * (1.0 - mu)
        grad = X.T @ (y - mu) - penalty * beta
        hess = (X.T * w) @ X
        hess[np.arange(X.shape[1]), np.arange(X.shape[1])] += penalty + 1e-10
        delta = np.linalg.solve(hess, grad)
        beta = beta + delta
        if np.abs(delta).max() < TOL:
            return LogisticModel(float(beta[0]), beta[1:].copy(), float(l2))
    raise ConvergenceError(
        f"ridge logistic did not converge in {MAX_ITER} iterations (l2={l2})",
        float(beta[0]), beta[1:].copy(),
    )


def predict_logistic(model: LogisticModel, x) -> np.ndarray:
    """Case probability expit(intercept + sum beta_j x_j); accepts 1-d or 2-d input."""
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    eta = model.intercept + X @ model.coefficients
    out = 1.0 / (1.0 + np.exp(-eta))
    return float(out[0]) if single else out


def select_l2(ds: GenotypeDataset, k: int, seed: int,
              grid=DEFAULT_L2_GRID) -> float:
    """Pick the penalty with the best stratified k-fold CV AUC (ties: smaller grid index)."""
    folds = stratified_kfold(ds, k, seed)
    means = []
    for l2 in grid:
        fold_aucs = []
        for fold in range(k):
            train_idx, test_idx = folds.train_test(fold)
            try:
                m = fit_logistic(ds.subset(train_idx), l2)
                test = ds.subset(test_idx)
                fold_aucs.append(auc(predict_logistic(m, test.genotypes), test.phenotype))
            except (ConvergenceError, np.linalg.LinAlgError):
                fold_aucs.append(np.nan)
        means.append(np.mean(fold_aucs))
    means = np.array(means)
    if np.isnan(means).all():
        raise RuntimeError("every penalty candidate failed to converge")
    return float(grid[int(np.nanargmax(means))])

"""Association tests used to label cells and score MDR models.

Two test families are provided: the unadjusted Pearson chi-square on a
cell-vs-rest 2x2 table, and a 1-df likelihood-ratio test that compares a
codominant main-effects logistic model against the same model plus a
cell-membership indicator, absorbing lower-order marginal effects.

All logistic fits aggregate samples into per-cell binomial rows first: the
covariates are constant within a cell, so the aggregation is exact and the
fit cost is independent of the sample count.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import chdtrc

from .data import MISSING, GenotypeDataset

logger = logging.getLogger(__name__)

# IRLS policy shared by the scalar and batched fitters
MAX_ITER = 25
TOL = 1e-8
CLAMP = 15.0
_JITTER = 1e-8


@dataclass(frozen=True)
class TestResult:
    """Outcome of one cell-vs-rest hypothesis test.

    ``direction`` is +1 when the cell's case rate exceeds the rest's, -1 when
    it is lower and 0 for equal rates or a degenerate test.
    """

    statistic: float
    p_value: float
    direction: int


def chisq_sf(x, df: int):
    """Chi-square survival function P(X >= x) via the regularized incomplete gamma."""
    x = np.asarray(x, dtype=np.float64)
    if (x < 0).any():
        raise ValueError("chi-square statistic must be non-negative")
    if df < 1:
        raise ValueError("df must be >= 1")
    out = chdtrc(df, x)
    return float(out) if out.ndim == 0 else out


def chisq_2x2(a, b, c, d):
    """Vectorized Pearson chi-square statistic of [[a, b], [c, d]], 0 when degenerate."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    n = a + b + c + d
    denom = (a + b) * (c + d) * (a + c) * (b + d)
    num = a * d - b * c
    with np.errstate(divide="ignore", invalid="ignore"):
        stat = np.where(denom > 0, n * num * num / np.where(denom > 0, denom, 1.0), 0.0)
    return stat


def two_by_two_chisq(a: int, b: int, c: int, d: int) -> TestResult:
    """Pearson chi-square (1 df, no continuity correction) of cell vs rest.

    Arguments are counts (cell-case, cell-control, rest-case, rest-control).
    A zero row or column marginal yields the degenerate result
    (statistic 0, p 1, direction 0) rather than an error.
    """
    if min(a, b, c, d) < 0:
        raise ValueError("counts must be non-negative")
    stat = float(chisq_2x2(a, b, c, d))
    if stat == 0.0:
        return TestResult(0.0, 1.0, 0)
    p = chisq_sf(stat, 1)
    cell_rate = a / (a + b)
    rest_rate = c / (c + d)
    direction = 0 if cell_rate == rest_rate else (1 if cell_rate > rest_rate else -1)
    return TestResult(stat, float(p), direction)


def _binom_loglik(eta, successes, totals):
    # sum y*eta - m*log(1 + exp(eta)), stable for large |eta|
    return float(np.sum(successes * eta - totals * np.logaddexp(0.0, eta)))


def fit_logistic_counts(Z: np.ndarray, successes: np.ndarray, totals: np.ndarray):
    """Newton/IRLS fit of a binomial logistic model on aggregated rows.

    Z is (r, p); ``successes`` and ``totals`` are per-row counts. Coefficients
    are clamped to [-CLAMP, CLAMP] (tames separation); the Hessian gets a
    scale-relative jitter so collinear or empty columns stay solvable.

    Returns (beta, loglik, converged).
    """
    r, p = Z.shape
    beta = np.zeros(p)
    converged = False
    for _ in range(MAX_ITER):
        eta = Z @ beta
        mu = 1.0 / (1.0 + np.exp(-eta))
        w = totals * mu * (1.0 - mu)
        grad = Z.T @ (successes - totals * mu)
        hess = (Z.T * w) @ Z
        scale = max(hess[np.arange(p), np.arange(p)].max(), 1.0)
        hess[np.arange(p), np.arange(p)] += _JITTER * scale
        delta = np.linalg.solve(hess, grad)
        new_beta = np.clip(beta + delta, -CLAMP, CLAMP)
        change = np.abs(new_beta - beta).max()
        beta = new_beta
        if change < TOL:
            converged = True
            break
    ll = _binom_loglik(Z @ beta, successes, totals)
    return beta, ll, converged


def fit_logistic_counts_batch(Z: np.ndarray, successes: np.ndarray, totals: np.ndarray):
    """Batched variant of :func:`fit_logistic_counts` over P problems sharing Z.

    ``successes`` and ``totals`` are (P, r). Returns (beta (P, p), loglik (P,),
    converged (P,)). Iteration policy matches the scalar fitter exactly.
    """
    P, r = successes.shape
    p = Z.shape[1]
    beta = np.zeros((P, p))
    converged = np.zeros(P, dtype=bool)
    active = np.arange(P)
    diag = np.arange(p)
    for _ in range(MAX_ITER):
        succ = successes[active]
        tot = totals[active]
        eta = beta[active] @ Z.T
        mu = 1.0 / (1.0 + np.exp(-eta))
        w = tot * mu * (1.0 - mu)
        grad = (succ - tot * mu) @ Z
        hess = np.einsum("pk,ki,kj->pij", w, Z, Z, optimize=True)
        scale = np.maximum(hess[:, diag, diag].max(axis=1), 1.0)
        hess[:, diag, diag] += _JITTER * scale[:, None]
        delta = np.linalg.solve(hess, grad[..., None])[..., 0]
        new_beta = np.clip(beta[active] + delta, -CLAMP, CLAMP)
        change = np.abs(new_beta - beta[active]).max(axis=1)
        beta[active] = new_beta
        done = change < TOL
        converged[active[done]] = True
        active = active[~done]
        if active.size == 0:
            break
    eta = beta @ Z.T
    ll = np.sum(successes * eta - totals * np.logaddexp(0.0, eta), axis=1)
    return beta, ll, converged


def codominant_design(radices) -> np.ndarray:
    """Main-effects design on the cell grid: intercept + per-feature level dummies.

    Rows follow the mixed-radix cell order (last feature fastest); reference
    level 0 per feature.
    """
    radices = tuple(int(r) for r in radices)
    ncell = int(np.prod(radices))
    cols = [np.ones(ncell)]
    idx = np.arange(ncell)
    stride = ncell
    for l in radices:
        stride //= l
        g = (idx // stride) % l
        for level in range(1, l):
            cols.append((g == level).astype(np.float64))
    return np.column_stack(cols)


def adjusted_cell_lrt(ds: GenotypeDataset, tup, cell=None, member_mask=None) -> TestResult:
    """1-df LRT for a cell effect adjusted for codominant lower-order effects.

    Compares logistic {intercept + level dummies for every feature in ``tup``}
    against the same model plus a membership indicator for the tested group.
    Membership defaults to the samples whose genotypes match ``cell`` exactly;
    a custom ``member_mask`` may be passed instead. Samples with a missing
    genotype in ``tup`` are excluded. Direction is the sign of the membership
    coefficient.
    """
    tup = tuple(int(j) for j in tup)
    if len(tup) < 2:
        raise ValueError("adjustment requires a tuple of order >= 2")
    if sorted(set(tup)) != list(tup):
        raise ValueError(f"tuple must be strictly increasing, got {tup}")
    sub = ds.genotypes[:, tup]
    valid = (sub != MISSING).all(axis=1)
    if member_mask is None:
        if cell is None:
            raise ValueError("pass either cell or member_mask")
        member_mask = (sub == np.asarray(cell, dtype=sub.dtype)).all(axis=1)
    member_mask = np.asarray(member_mask, dtype=bool) & valid

    radices = tuple(int(ds.levels[j]) for j in tup)
    strides = np.cumprod((1,) + radices[:0:-1])[::-1]
    codes = (sub[valid].astype(np.int64) * strides).sum(axis=1)
    member = member_mask[valid]
    y = ds.phenotype[valid]

    ncell = int(np.prod(radices))
    # aggregate on (cell, membership) so arbitrary masks stay exact
    keys = codes * 2 + member
    successes = np.bincount(keys, weights=(y == 1), minlength=2 * ncell)
    totals = np.bincount(keys, minlength=2 * ncell).astype(np.float64)

    base = codominant_design(radices)
    Z_red = np.repeat(base, 2, axis=0)
    Z_full = np.column_stack([Z_red, np.tile([0.0, 1.0], ncell)])

    occupied = totals > 0
    beta_r, ll_r, conv_r = fit_logistic_counts(Z_red[occupied], successes[occupied], totals[occupied])
    beta_f, ll_f, conv_f = fit_logistic_counts(Z_full[occupied], successes[occupied], totals[occupied])
    if not (conv_r and conv_f):
        logger.warning("adjusted LRT did not converge for tuple %s; degenerate result", tup)
        return TestResult(0.0, 1.0, 0)
    stat = max(0.0, 2.0 * (ll_f - ll_r))
    coef = beta_f[-1]
    direction = 0 if stat == 0.0 or coef == 0.0 else (1 if coef > 0 else -1)
    return TestResult(stat, float(chisq_sf(stat, 1)), direction)

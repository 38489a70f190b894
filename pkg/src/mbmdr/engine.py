"""Core MDR machinery: cell tables, H/L/O labeling, model statistics, ranking.

For a feature tuple, samples are grouped into cells by their level
combination (mixed-radix cell index, last feature fastest). Each cell is
tested against all remaining samples and labeled H (high risk), L (low risk)
or O (ambiguous: too small, not significant, or no direction). A model's
statistic is the larger of the two pooled chi-squares (all H cells vs rest,
all L cells vs rest); the exhaustive ranking sorts every tuple by that
statistic.

The exhaustive order-2 scan is vectorized across all pairs (one-hot count
matmuls, batched IRLS for the adjusted test); results are identical to
running the per-tuple operations one at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import combinations
from math import comb

import numpy as np
from scipy.special import chdtrc

from .data import MISSING, GenotypeDataset
from .stats import (
    adjusted_cell_lrt,
    chisq_2x2,
    codominant_design,
    fit_logistic_counts_batch,
    two_by_two_chisq,
)

LABEL_H = 1
LABEL_L = -1
LABEL_O = 0

ADJUSTMENTS = ("NONE", "CODOMINANT")

DEFAULT_MODEL_CAP = 5_000_000


@dataclass(frozen=True)
class HyperParams:
    """MDR construction and prediction hyperparameters.

    ``order`` is the model dimension (1 or 2); with ``order_range`` it acts as
    an upper limit and all lower orders are enumerated too. ``alpha`` and
    ``min_cell_size`` control the H/L/O labeling screen, ``adjustment``
    selects the cell test (plain chi-square or codominant-adjusted LRT for
    order >= 2), ``o_as_na`` picks the O-cell handling at prediction time and
    ``s`` is the number of top-ranked models aggregated into predictions.
    """

    order: int = 2
    order_range: bool = False
    adjustment: str = "NONE"
    alpha: float = 0.1
    min_cell_size: int = 10
    o_as_na: bool = False
    s: int = 10

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order}")
        if self.adjustment not in ADJUSTMENTS:
            raise ValueError(f"adjustment must be one of {ADJUSTMENTS}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.min_cell_size < 0:
            raise ValueError("min_cell_size must be >= 0")
        if self.s < 1:
            raise ValueError("s must be >= 1")

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "order_range": self.order_range,
            "adjustment": self.adjustment,
            "alpha": self.alpha,
            "min_cell_size": self.min_cell_size,
            "o_as_na": self.o_as_na,
            "s": self.s,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HyperParams":
        return cls(**{k: d[k] for k in
                      ("order", "order_range", "adjustment", "alpha",
                       "min_cell_size", "o_as_na", "s")})


@dataclass(frozen=True)
class CellTable:
    """Per-tuple cell grid: counts, tests and labels in mixed-radix cell order."""

    tuple: tuple[int, ...]
    radices: tuple[int, ...]
    case_counts: np.ndarray
    control_counts: np.ndarray
    global_case_fraction: float
    statistic: np.ndarray | None = None
    p_value: np.ndarray | None = None
    direction: np.ndarray | None = None
    labels: np.ndarray | None = None
    case_proportion: np.ndarray | None = None

    @property
    def n_cases(self) -> int:
        return int(self.case_counts.sum())

    @property
    def n_controls(self) -> int:
        return int(self.control_counts.sum())

    @property
    def totals(self) -> np.ndarray:
        return self.case_counts + self.control_counts


@dataclass(frozen=True)
class MdrModel:
    """One ranked prediction unit: a labeled cell grid plus its model statistic."""

    tuple: tuple[int, ...]
    radices: tuple[int, ...]
    labels: np.ndarray
    case_proportion: np.ndarray
    case_counts: np.ndarray
    control_counts: np.ndarray
    statistic: float
    fallback: float


@dataclass(frozen=True)
class ModelRanking:
    """All enumerated models sorted by (statistic desc, tuple lexicographic asc)."""

    models: list[MdrModel]
    hyperparams: HyperParams

    def top(self, s: int) -> list[MdrModel]:
        return self.models[: min(s, len(self.models))]


def mixed_radix_codes(sub: np.ndarray, radices) -> np.ndarray:
    """Cell index per sample (last feature fastest); -1 where any entry is missing."""
    radices = tuple(int(r) for r in radices)
    strides = np.ones(len(radices), dtype=np.int64)
    for k in range(len(radices) - 2, -1, -1):
        strides[k] = strides[k + 1] * radices[k + 1]
    valid = (sub != MISSING).all(axis=1)
    codes = (sub.astype(np.int64) * strides).sum(axis=1)
    codes[~valid] = -1
    return codes


def _check_tuple(ds: GenotypeDataset, tup) -> tuple[int, ...]:
    tup = tuple(int(j) for j in tup)
    if not 1 <= len(tup) <= 2:
        raise ValueError(f"tuple order must be 1 or 2, got {len(tup)}")
    if len(set(tup)) != len(tup):
        raise ValueError(f"duplicate feature in tuple {tup}")
    if list(tup) != sorted(tup):
        raise ValueError(f"tuple must be strictly increasing, got {tup}")
    if tup[0] < 0 or tup[-1] >= ds.q:
        raise ValueError(f"feature index out of range in {tup}")
    return tup


def arrange_cells(ds: GenotypeDataset, tup) -> CellTable:
    """Count cases/controls per cell for one feature tuple.

    Samples with a missing genotype in the tuple are excluded.
    """
    tup = _check_tuple(ds, tup)
    radices = tuple(int(ds.levels[j]) for j in tup)
    ncell = int(np.prod(radices))
    codes = mixed_radix_codes(ds.genotypes[:, tup], radices)
    valid = codes >= 0
    y = ds.phenotype[valid]
    codes = codes[valid]
    case_counts = np.bincount(codes[y == 1], minlength=ncell).astype(np.int64)
    control_counts = np.bincount(codes[y == 0], minlength=ncell).astype(np.int64)
    return CellTable(tup, radices, case_counts, control_counts, ds.case_fraction)


def _screen_labels(stat, p, direction, totals, hp: HyperParams):
    """Apply the n_min / alpha screen: H/L only for big, significant, directed cells."""
    eligible = (totals >= hp.min_cell_size) & (p < hp.alpha) & (direction != 0)
    labels = np.where(eligible, direction, LABEL_O).astype(np.int8)
    return labels


def label_cells(ct: CellTable, hp: HyperParams, ds: GenotypeDataset) -> CellTable:
    """Test every cell against the rest and assign H/L/O labels.

    Uses the plain chi-square, or the codominant-adjusted LRT when
    ``hp.adjustment == "CODOMINANT"`` and the tuple has order >= 2.
    """
    ncell = ct.case_counts.size
    ncase, nctrl = ct.n_cases, ct.n_controls
    use_lrt = hp.adjustment == "CODOMINANT" and len(ct.tuple) >= 2
    if use_lrt:
        stat = np.zeros(ncell)
        p = np.ones(ncell)
        direction = np.zeros(ncell, dtype=np.int8)
        codes = mixed_radix_codes(ds.genotypes[:, ct.tuple], ct.radices)
        for c in range(ncell):
            res = adjusted_cell_lrt(ds, ct.tuple, member_mask=codes == c)
            stat[c], p[c], direction[c] = res.statistic, res.p_value, res.direction
    else:
        a = ct.case_counts.astype(np.float64)
        b = ct.control_counts.astype(np.float64)
        stat = chisq_2x2(a, b, ncase - a, nctrl - b)
        p = np.where(stat > 0, chdtrc(1, stat), 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            cell_rate = np.where(a + b > 0, a / (a + b), 0.0)
            rest_tot = (ncase - a) + (nctrl - b)
            rest_rate = np.where(rest_tot > 0, (ncase - a) / np.where(rest_tot > 0, rest_tot, 1.0), 0.0)
        direction = np.sign(cell_rate - rest_rate).astype(np.int8)
        direction[stat == 0] = 0
    totals = ct.totals
    labels = _screen_labels(stat, p, direction, totals, hp)
    with np.errstate(divide="ignore", invalid="ignore"):
        proportion = np.where(totals > 0, ct.case_counts / np.where(totals > 0, totals, 1), np.nan)
    return replace(ct, statistic=stat, p_value=p, direction=direction,
                   labels=labels, case_proportion=proportion)


def model_statistic(ct: CellTable) -> MdrModel:
    """Pool H cells vs everything else (likewise L) and keep the larger chi-square."""
    if ct.labels is None:
        raise ValueError("cell table must be labeled first")
    ncase, nctrl = ct.n_cases, ct.n_controls
    t = []
    for lab in (LABEL_H, LABEL_L):
        mask = ct.labels == lab
        pc = int(ct.case_counts[mask].sum())
        pk = int(ct.control_counts[mask].sum())
        t.append(float(chisq_2x2(pc, pk, ncase - pc, nctrl - pk)))
    return MdrModel(
        tuple=ct.tuple,
        radices=ct.radices,
        labels=ct.labels.copy(),
        case_proportion=ct.case_proportion.copy(),
        case_counts=ct.case_counts.copy(),
        control_counts=ct.control_counts.copy(),
        statistic=max(t),
        fallback=ct.global_case_fraction,
    )


def build_model(ds: GenotypeDataset, tup, hp: HyperParams) -> MdrModel:
    """Arrange, label and score a single tuple (reference path)."""
    return model_statistic(label_cells(arrange_cells(ds, tup), hp, ds))


def count_models(q: int, hp: HyperParams) -> int:
    orders = range(1, hp.order + 1) if hp.order_range else (hp.order,)
    return sum(comb(q, d) for d in orders)


def _pooled_stats(labels, case_counts, control_counts, ncase, nctrl):
    """Model statistics for batched tables: labels/counts are (..., m) arrays."""
    stats = []
    for lab in (LABEL_H, LABEL_L):
        mask = labels == lab
        pc = np.where(mask, case_counts, 0).sum(axis=-1)
        pk = np.where(mask, control_counts, 0).sum(axis=-1)
        stats.append(chisq_2x2(pc, pk, ncase - pc, nctrl - pk))
    return np.maximum(stats[0], stats[1])


def _label_batch_chisq(case_counts, control_counts, hp: HyperParams):
    """Vectorized chi-square labeling; count arrays are (..., m) floats."""
    ncase = case_counts.sum(axis=-1, keepdims=True)
    nctrl = control_counts.sum(axis=-1, keepdims=True)
    a, b = case_counts, control_counts
    stat = chisq_2x2(a, b, ncase - a, nctrl - b)
    p = np.where(stat > 0, chdtrc(1, stat), 1.0)
    tot = a + b
    rest_tot = (ncase - a) + (nctrl - b)
    with np.errstate(divide="ignore", invalid="ignore"):
        cell_rate = np.where(tot > 0, a / np.where(tot > 0, tot, 1), 0.0)
        rest_rate = np.where(rest_tot > 0, (ncase - a) / np.where(rest_tot > 0, rest_tot, 1), 0.0)
    direction = np.sign(cell_rate - rest_rate).astype(np.int8)
    direction[stat == 0] = 0
    labels = _screen_labels(stat, p, direction, tot, hp)
    return labels


def _label_batch_lrt(case_counts, control_counts, radices, hp: HyperParams):
    """Batched codominant-adjusted LRT labels; count arrays are (P, m)."""
    P, m = case_counts.shape
    totals = case_counts + control_counts
    base = codominant_design(radices)
    _, ll_red, conv_red = fit_logistic_counts_batch(base, case_counts, totals)
    stat = np.zeros((P, m))
    direction = np.zeros((P, m), dtype=np.int8)
    converged = np.tile(conv_red[:, None], (1, m))
    for c in range(m):
        Zc = np.column_stack([base, (np.arange(m) == c).astype(np.float64)])
        beta_f, ll_f, conv_f = fit_logistic_counts_batch(Zc, case_counts, totals)
        s = np.maximum(0.0, 2.0 * (ll_f - ll_red))
        stat[:, c] = s
        coef = beta_f[:, -1]
        d = np.sign(coef).astype(np.int8)
        d[s == 0] = 0
        direction[:, c] = d
        converged[:, c] &= conv_f
    stat = np.where(converged, stat, 0.0)
    direction = np.where(converged, direction, 0).astype(np.int8)
    p = np.where(stat > 0, chdtrc(1, stat), 1.0)
    return _screen_labels(stat, p, direction, totals, hp)


def _onehot_counts(ds: GenotypeDataset):
    """One-hot per-class genotype indicators: (L, n_class, q) float arrays."""
    L = int(ds.levels.max())
    g = ds.genotypes
    case = ds.phenotype == 1
    hot_case = np.stack([(g[case] == a) for a in range(L)]).astype(np.float64)
    hot_ctrl = np.stack([(g[~case] == a) for a in range(L)]).astype(np.float64)
    return L, hot_case, hot_ctrl


def _scan_order1(ds: GenotypeDataset, hp: HyperParams) -> list[MdrModel]:
    L, hot_case, hot_ctrl = _onehot_counts(ds)
    # (L, q) per-level counts; invalid levels for a feature are structurally zero
    cc = hot_case.sum(axis=1)
    kk = hot_ctrl.sum(axis=1)
    models = []
    for j in range(ds.q):
        lj = int(ds.levels[j])
        a = cc[:lj, j]
        b = kk[:lj, j]
        labels = _label_batch_chisq(a, b, hp)
        stat = float(_pooled_stats(labels, a, b, a.sum(), b.sum()))
        tot = a + b
        with np.errstate(divide="ignore", invalid="ignore"):
            prop = np.where(tot > 0, a / np.where(tot > 0, tot, 1), np.nan)
        models.append(MdrModel((j,), (lj,), labels, prop, a.astype(np.int64),
                               b.astype(np.int64), stat, ds.case_fraction))
    return models


def _scan_order2(ds: GenotypeDataset, hp: HyperParams) -> list[MdrModel]:
    L, hot_case, hot_ctrl = _onehot_counts(ds)
    # counts[a, b, j, k]: samples per class with feature j at level a, k at level b
    cc = np.einsum("anj,bnk->abjk", hot_case, hot_case, optimize=True)
    kk = np.einsum("anj,bnk->abjk", hot_ctrl, hot_ctrl, optimize=True)
    ju, ku = np.triu_indices(ds.q, k=1)
    # (P, L*L) in mixed-radix order (second feature fastest)
    case_grid = cc[:, :, ju, ku].reshape(L * L, ju.size).T
    ctrl_grid = kk[:, :, ju, ku].reshape(L * L, ju.size).T

    use_lrt = hp.adjustment == "CODOMINANT"
    pair_levels = np.stack([ds.levels[ju], ds.levels[ku]], axis=1)
    models: list[MdrModel] = [None] * ju.size  # type: ignore[list-item]
    grid_cols = np.arange(L * L).reshape(L, L)

    for l1, l2 in sorted({(int(a), int(b)) for a, b in pair_levels}):
        sel = np.flatnonzero((pair_levels[:, 0] == l1) & (pair_levels[:, 1] == l2))
        cols = grid_cols[:l1, :l2].ravel()
        a = case_grid[sel][:, cols]
        b = ctrl_grid[sel][:, cols]
        if use_lrt:
            labels = _label_batch_lrt(a, b, (l1, l2), hp)
        else:
            labels = _label_batch_chisq(a, b, hp)
        stats = _pooled_stats(labels, a, b, a.sum(axis=1), b.sum(axis=1))
        tot = a + b
        with np.errstate(divide="ignore", invalid="ignore"):
            prop = np.where(tot > 0, a / np.where(tot > 0, tot, 1), np.nan)
        for row, pidx in enumerate(sel):
            models[pidx] = MdrModel(
                (int(ju[pidx]), int(ku[pidx])), (l1, l2),
                labels[row].copy(), prop[row].copy(),
                a[row].astype(np.int64), b[row].astype(np.int64),
                float(stats[row]), ds.case_fraction,
            )
    return models


def enumerate_and_rank(ds: GenotypeDataset, hp: HyperParams,
                       model_cap: int = DEFAULT_MODEL_CAP) -> ModelRanking:
    """Score every feature tuple of the requested order(s) and rank them.

    With ``order_range`` every order from 1 to ``hp.order`` is enumerated.
    Ties in the statistic are broken by the lexicographically smallest tuple,
    making the ranking fully deterministic.
    """
    if ds.q < hp.order:
        raise ValueError(f"order {hp.order} exceeds feature count {ds.q}")
    total = count_models(ds.q, hp)
    if total > model_cap:
        raise ValueError(
            f"refusing to enumerate {total} models (cap {model_cap});"
            " raise model_cap to override"
        )
    orders = range(1, hp.order + 1) if hp.order_range else (hp.order,)
    models: list[MdrModel] = []
    for d in orders:
        if d == 1:
            models.extend(_scan_order1(ds, hp))
        else:
            models.extend(_scan_order2(ds, hp))
    models.sort(key=lambda m: (-m.statistic, m.tuple))
    return ModelRanking(models=models, hyperparams=hp)

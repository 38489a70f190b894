"""Penetrance-table mathematics and table generators.

A penetrance table assigns each multilocus genotype combination the
probability of being a case. Tables carry Hardy-Weinberg genotype
probabilities per locus, from which population prevalence and heritability
follow. Conversions between penetrances and logistic effect parameters use
the exact inclusion-exclusion over logit-penetrances, so a round trip is the
identity for interior tables.

Two generators mirror the simulation designs: main-effect tables from an
additive-coded logistic model, and pure-epistasis tables with constant
single-locus marginals found by randomized search (project a random deviation
onto the zero-marginal subspace, refine it into the feasible box, scale to
the target heritability around prevalence 0.5, reject and retry on failure).
For three loci the two-locus marginals are constrained flat as well, so the
table is strictly epistatic: no proper subset of the loci carries any signal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np
from scipy.optimize import brentq

from .errors import InfeasibilityError

EffectKey = tuple[tuple[int, int], ...]


def logit(p):
    """Log-odds; defined on the open interval (0, 1)."""
    p = np.asarray(p, dtype=np.float64)
    if (p <= 0).any() or (p >= 1).any():
        raise ValueError("logit requires values strictly inside (0, 1)")
    out = np.log(p / (1.0 - p))
    return float(out) if out.ndim == 0 else out


def expit(z):
    """Inverse logit, exp(z) / (1 + exp(z)), numerically stable."""
    z = np.asarray(z, dtype=np.float64)
    out = np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))),
                   np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))
    return float(out) if out.ndim == 0 else out


def hwe_probs(maf: float) -> tuple[float, float, float]:
    """Hardy-Weinberg genotype probabilities ((1-m)^2, 2m(1-m), m^2)."""
    if not 0.0 < maf <= 0.5:
        raise ValueError(f"minor allele frequency must be in (0, 0.5], got {maf}")
    return ((1.0 - maf) ** 2, 2.0 * maf * (1.0 - maf), maf * maf)


def genotype_combinations(d: int) -> list[tuple[int, ...]]:
    """All genotype combinations of d loci in mixed-radix order (last locus fastest)."""
    return list(product(range(3), repeat=d))


def joint_probs(genotype_probs: np.ndarray) -> np.ndarray:
    """P(g) for every combination, products of the per-locus probabilities."""
    d = genotype_probs.shape[0]
    pg = np.ones(1)
    for j in range(d):
        pg = (pg[:, None] * genotype_probs[j][None, :]).ravel()
    return pg


@dataclass(frozen=True)
class PenetranceTable:
    """Per-genotype-combination case probabilities plus derived K and h2."""

    mafs: tuple[float, ...]
    genotype_probs: np.ndarray  # (d, 3)
    f: np.ndarray               # (3^d,), mixed-radix order
    K: float = field(init=False)
    h2: float = field(init=False)

    def __post_init__(self):
        d = len(self.mafs)
        f = np.asarray(self.f, dtype=np.float64)
        if f.shape != (3 ** d,):
            raise ValueError(f"expected {3 ** d} penetrances for {d} loci, got {f.shape}")
        if (f < 0).any() or (f > 1).any():
            raise ValueError("penetrances must lie in [0, 1]")
        probs = np.asarray(self.genotype_probs, dtype=np.float64)
        if probs.shape != (d, 3) or not np.allclose(probs.sum(axis=1), 1.0, atol=1e-12):
            raise ValueError("genotype_probs must be (d, 3) rows summing to 1")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "genotype_probs", probs)
        pg = joint_probs(probs)
        K = float(pg @ f)
        object.__setattr__(self, "K", K)
        if 0.0 < K < 1.0:
            h2 = float(pg @ (f - K) ** 2 / (K * (1.0 - K)))
        else:
            h2 = np.nan
        object.__setattr__(self, "h2", h2)
        f.setflags(write=False)
        probs.setflags(write=False)

    @property
    def d(self) -> int:
        return len(self.mafs)


def table_from_mafs(mafs, f) -> PenetranceTable:
    """Penetrance table with HWE genotype probabilities derived from MAFs."""
    mafs = tuple(float(m) for m in mafs)
    probs = np.array([hwe_probs(m) for m in mafs])
    return PenetranceTable(mafs, probs, np.asarray(f, dtype=np.float64))


def prevalence(pt: PenetranceTable) -> float:
    """Population prevalence: probability-weighted mean penetrance."""
    return float(joint_probs(pt.genotype_probs) @ pt.f)


def heritability(pt: PenetranceTable) -> float:
    """Explained variance fraction, sum P(g) (f_g - K)^2 / (K (1 - K))."""
    pg = joint_probs(pt.genotype_probs)
    K = float(pg @ pt.f)
    if K <= 0.0 or K >= 1.0:
        raise ValueError("heritability undefined when prevalence is 0 or 1")
    return float(pg @ (pt.f - K) ** 2 / (K * (1.0 - K)))


def marginal_penetrance(pt: PenetranceTable, drop: int) -> PenetranceTable:
    """Average the dropped locus out, weighted by its genotype probabilities."""
    d = pt.d
    if not 0 <= drop < d:
        raise ValueError(f"locus index {drop} out of range for d={d}")
    grid = pt.f.reshape((3,) * d)
    w = pt.genotype_probs[drop]
    f_marg = np.tensordot(grid, w, axes=([drop], [0])).ravel()
    keep = [j for j in range(d) if j != drop]
    return PenetranceTable(
        tuple(pt.mafs[j] for j in keep),
        pt.genotype_probs[keep].copy() if keep else np.empty((0, 3)),
        f_marg,
    )


@dataclass(frozen=True)
class EffectVector:
    """Logistic effect parameters: intercept plus one term per genotype mask.

    Keys are tuples of (locus, genotype) pairs with genotype in {1, 2}, e.g.
    ((0, 2),) for a main effect of genotype 2 at locus 0 and ((0, 2), (1, 1))
    for an interaction term. Missing keys act as zero.
    """

    beta0: float
    effects: dict[EffectKey, float]

    def __post_init__(self):
        if not np.isfinite(self.beta0) or not all(np.isfinite(v) for v in self.effects.values()):
            raise ValueError("effect parameters must be finite")


def _nonref_positions(g: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    return tuple((j, gj) for j, gj in enumerate(g) if gj != 0)


def effects_to_penetrance(ev: EffectVector, d: int) -> np.ndarray:
    """Penetrances from logistic effects: expit of beta0 plus every active term.

    A term is active at combination g when all its (locus, genotype) pairs
    match g; the sum runs over every non-empty subset of g's non-reference
    positions.
    """
    f = np.empty(3 ** d)
    for i, g in enumerate(genotype_combinations(d)):
        nonref = _nonref_positions(g)
        z = ev.beta0
        for k in range(1, len(nonref) + 1):
            for subset in combinations(nonref, k):
                z += ev.effects.get(subset, 0.0)
        f[i] = expit(z)
    return f


def _mobius_effects(values: np.ndarray, d: int) -> tuple[float, dict[EffectKey, float]]:
    """Alternating inclusion-exclusion of a transformed table over subsets."""
    grid = values.reshape((3,) * d)
    ref = float(grid[(0,) * d])
    effects: dict[EffectKey, float] = {}
    for g in genotype_combinations(d):
        nonref = _nonref_positions(g)
        j = len(nonref)
        if j == 0:
            continue
        total = 0.0
        for k in range(j + 1):
            sign = (-1.0) ** (j - k)
            for subset in combinations(nonref, k):
                idx = [0] * d
                for locus, geno in subset:
                    idx[locus] = geno
                total += sign * float(grid[tuple(idx)])
        effects[nonref] = total
    return ref, effects


def penetrance_to_effects(f, d: int) -> EffectVector:
    """Logistic effect parameters of a table with all penetrances inside (0, 1)."""
    f = np.asarray(f, dtype=np.float64)
    beta0, effects = _mobius_effects(logit(f), d)
    return EffectVector(beta0, effects)


def penetrance_scale_effects(f, d: int) -> EffectVector:
    """Same decomposition on the raw probability scale.

    Interaction entries measure the deviation from additivity of penetrance
    changes; they can be nonzero even when the logit-scale interactions vanish
    (the scale effect).
    """
    f = np.asarray(f, dtype=np.float64)
    ref, effects = _mobius_effects(f, d)
    return EffectVector(ref, effects)


def generate_main_effect_table(maf: float, target_h2: float,
                               beta_max: float = 60.0) -> PenetranceTable:
    """Single-locus table from an additive logistic model, prevalence 0.5.

    f_g = expit(beta0 + beta * g); beta0 root-found so K = 0.5, beta bisected
    so the heritability hits the target.
    """
    if not 0.0 < target_h2 < 1.0:
        raise ValueError(f"target heritability must be in (0, 1), got {target_h2}")
    p = np.array(hwe_probs(maf))
    g = np.arange(3.0)

    def k_gap(beta0: float, beta: float) -> float:
        return float(p @ expit(beta0 + beta * g)) - 0.5

    def h2_at(beta: float) -> float:
        beta0 = brentq(k_gap, -400.0, 400.0, args=(beta,), xtol=1e-15)
        f = expit(beta0 + beta * g)
        K = float(p @ f)
        return float(p @ (f - K) ** 2 / (K * (1.0 - K)))

    top = h2_at(beta_max)
    if top < target_h2:
        raise InfeasibilityError(
            f"heritability {target_h2} unreachable for MAF {maf}"
            f" (additive-logit maximum ~{top:.4f})"
        )
    beta = brentq(lambda b: h2_at(b) - target_h2, 0.0, beta_max, xtol=1e-13)
    beta0 = brentq(k_gap, -400.0, 400.0, args=(beta,), xtol=1e-15)
    return table_from_mafs((maf,), expit(beta0 + beta * g))


def marginal_constraint_matrix(mafs, strict_pairs: bool | None = None):
    """Rows forcing flat marginal penetrance deviations, plus joint cell probs.

    One row per (locus subset, genotype assignment): the weighted sum of
    deviations over cells matching the assignment. By default subsets are the
    single loci; for d >= 3 the two-locus subsets are added so generated
    tables are strictly epistatic.
    """
    mafs = tuple(float(m) for m in mafs)
    d = len(mafs)
    probs = np.array([hwe_probs(m) for m in mafs])
    cells = genotype_combinations(d)
    if strict_pairs is None:
        strict_pairs = d >= 3
    sizes = [1, 2] if (strict_pairs and d >= 3) else [1]
    rows = []
    for size in sizes:
        for subset in combinations(range(d), size):
            grouped: dict[tuple[int, ...], np.ndarray] = {}
            for ci, g in enumerate(cells):
                key = tuple(g[j] for j in subset)
                w = 1.0
                for j in range(d):
                    if j not in subset:
                        w *= probs[j][g[j]]
                grouped.setdefault(key, np.zeros(len(cells)))[ci] = w
            rows.extend(grouped.values())
    return np.array(rows), joint_probs(probs)


def generate_pure_epistasis_table(mafs, target_h2: float, seed: int,
                                  max_tries: int = 2000) -> PenetranceTable:
    """Zero-marginal table with prevalence 0.5 and the exact target heritability.

    Randomized search: draw a deviation, project it onto the zero-marginal
    subspace, push it into the feasible box by alternating clipping and
    re-projection, then scale so the heritability around K = 0.5 matches the
    target; reject whenever a penetrance would leave [0, 1]. Raises
    InfeasibilityError with the largest achievable heritability seen when
    max_tries is exhausted.
    """
    mafs = tuple(float(m) for m in mafs)
    d = len(mafs)
    if d not in (2, 3):
        raise ValueError(f"pure-epistasis tables support 2 or 3 loci, got {d}")
    if not 0.0 < target_h2 < 1.0:
        raise ValueError(f"target heritability must be in (0, 1), got {target_h2}")
    A, pg = marginal_constraint_matrix(mafs)
    _, sv, vt = np.linalg.svd(A)
    rank = int((sv > 1e-12 * sv[0]).sum())
    null_basis = vt[rank:].T
    proj = null_basis @ null_basis.T
    ncell = pg.size
    rng = np.random.default_rng(seed)
    target_ss = target_h2 * 0.25  # sum P(g) delta^2 at K = 0.5
    best_h2 = 0.0
    for _ in range(max_tries):
        delta = proj @ rng.standard_normal(ncell)
        for _ in range(10):
            m = np.abs(delta).max()
            if m <= 0:
                break
            delta = proj @ np.clip(delta * (0.5 / m), -0.5, 0.5)
        ss = float(pg @ delta ** 2)
        dmax = float(np.abs(delta).max())
        if ss <= 0.0 or dmax <= 0.0:
            continue
        best_h2 = max(best_h2, ss / dmax ** 2)
        lam = np.sqrt(target_ss / ss)
        if lam * dmax <= 0.5:
            return table_from_mafs(mafs, 0.5 + lam * delta)
    raise InfeasibilityError(
        f"no zero-marginal table with h2={target_h2} at MAFs {mafs} found in"
        f" {max_tries} tries (largest achievable h2 seen: {best_h2:.4f})"
    )

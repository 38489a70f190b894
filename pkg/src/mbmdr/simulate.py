"""Balanced case-control data generator for the benchmark scenarios.

Every feature is a SNP drawn under Hardy-Weinberg equilibrium. Effect
components (single SNPs, pairs, triples) carry penetrance tables normalized
to prevalence 0.5; per sample the component penetrances are aggregated by
summing on the logit scale and transforming back, the phenotype is a
Bernoulli draw from the aggregate, and whole samples are rejection-sampled
until the case and control halves are full. Noise SNPs get MAFs drawn
uniformly from the configured range.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import GenotypeDataset, make_dataset
from .errors import InfeasibilityError
from .penetrance import (
    PenetranceTable,
    generate_main_effect_table,
    generate_pure_epistasis_table,
    hwe_probs,
)

_CLIP = 1e-12  # keeps logits of boundary penetrances finite


@dataclass(frozen=True)
class ComponentSpec:
    """One effect component: MAFs of its loci and its target heritability."""

    mafs: tuple[float, ...]
    h2: float

    def __post_init__(self):
        if len(self.mafs) not in (1, 2, 3):
            raise ValueError("components have 1, 2 or 3 loci")


@dataclass(frozen=True)
class ScenarioSpec:
    """Full simulation recipe: components, total SNP count, sample size, seed."""

    components: tuple[ComponentSpec, ...]
    q_total: int
    n: int
    seed: int
    noise_maf_range: tuple[float, float] = (0.05, 0.5)

    def __post_init__(self):
        used = sum(len(c.mafs) for c in self.components)
        if self.q_total < used:
            raise ValueError(f"q_total={self.q_total} is below the {used} effect SNPs")
        if self.n < 2 or self.n % 2:
            raise ValueError("n must be an even number >= 2 (balanced design)")

    @property
    def effect_count(self) -> int:
        return sum(len(c.mafs) for c in self.components)


# component layouts of the eight benchmark scenarios: entries are component
# sizes; scenario 0 is the pure-noise null. Default MAFs follow the benchmark
# grid (singles appended to mixed scenarios at 0.1, 0.2, 0.4).
SCENARIO_SIZES = {
    0: [],
    1: [1],
    2: [1, 1, 1, 1, 1],
    3: [2],
    4: [2, 1, 1, 1],
    5: [2, 2],
    6: [2, 2, 2],
    7: [2, 2, 2, 1, 1, 1],
    8: [3, 1, 1, 1],
}

_DEFAULT_MAFS = {
    2: [0.4, 0.4, 0.4, 0.4, 0.4],
    4: [None, None, 0.1, 0.2, 0.4],
    5: [0.1, 0.1, 0.2, 0.2],
    6: [0.1, 0.1, 0.2, 0.2, 0.4, 0.4],
    7: [0.1, 0.1, 0.2, 0.2, 0.4, 0.4, 0.1, 0.2, 0.4],
    8: [0.1, 0.2, 0.4, 0.1, 0.2, 0.4],
}


def build_scenario(scenario: int, mafs, h2: float, n: int, q: int = 100,
                   seed: int = 0, noise_maf_range=(0.05, 0.5)) -> ScenarioSpec:
    """ScenarioSpec for one of the benchmark scenarios (0 = pure noise).

    ``mafs`` lists the effect-SNP MAFs flattened in component order; trailing
    values may be omitted wherever the scenario has defaults (mixed scenarios
    fix the extra single SNPs at 0.1/0.2/0.4). Scenario 2 accepts a single
    value applied to all five SNPs.
    """
    if scenario not in SCENARIO_SIZES:
        raise ValueError(f"scenario must be one of {sorted(SCENARIO_SIZES)}")
    sizes = SCENARIO_SIZES[scenario]
    need = sum(sizes)
    mafs = [float(m) for m in (mafs or [])]
    if scenario == 2 and len(mafs) == 1:
        mafs = mafs * 5
    defaults = _DEFAULT_MAFS.get(scenario, [None] * need)
    if len(mafs) < need:
        tail = defaults[len(mafs):]
        if any(v is None for v in tail):
            raise ValueError(
                f"scenario {scenario} needs {need} MAF values, got {len(mafs)}"
            )
        mafs = mafs + [float(v) for v in tail]
    if len(mafs) != need:
        raise ValueError(f"scenario {scenario} needs {need} MAF values, got {len(mafs)}")
    components = []
    at = 0
    for size in sizes:
        components.append(ComponentSpec(tuple(mafs[at:at + size]), float(h2)))
        at += size
    return ScenarioSpec(tuple(components), q_total=q, n=n, seed=seed,
                        noise_maf_range=tuple(noise_maf_range))


def _derived_seeds(spec: ScenarioSpec):
    """One spawn of the root seed: per-component children, noise child, sampling child."""
    children = np.random.SeedSequence(spec.seed).spawn(len(spec.components) + 2)
    return children[: len(spec.components)], children[-2], children[-1]


def component_tables(spec: ScenarioSpec) -> list[PenetranceTable]:
    """Generate each component's prevalence-0.5 table (deterministic per seed)."""
    table_seeds, _, _ = _derived_seeds(spec)
    tables = []
    for comp, ss in zip(spec.components, table_seeds):
        if len(comp.mafs) == 1:
            tables.append(generate_main_effect_table(comp.mafs[0], comp.h2))
        else:
            tables.append(generate_pure_epistasis_table(
                comp.mafs, comp.h2, seed=int(ss.generate_state(1)[0])))
    return tables


def _draw_genotypes(rng: np.random.Generator, probs: np.ndarray, count: int) -> np.ndarray:
    """(count, q) genotype draws; probs is (q, 3) per-SNP genotype probabilities."""
    u = rng.random((count, probs.shape[0]))
    thresholds = probs.cumsum(axis=1)
    g = (u > thresholds[None, :, 0]).astype(np.int16)
    g += (u > thresholds[None, :, 1]).astype(np.int16)
    return g


def aggregate_penetrance(tables, genotypes: np.ndarray) -> np.ndarray:
    """Per-sample case probability: logit-scale sum of component penetrances.

    Component loci occupy the leading columns of ``genotypes`` in component
    order. With no components the result is the constant 0.5.
    """
    z = np.zeros(genotypes.shape[0])
    at = 0
    for pt in tables:
        d = pt.d
        cols = genotypes[:, at:at + d].astype(np.int64)
        codes = cols[:, 0]
        for k in range(1, d):
            codes = codes * 3 + cols[:, k]
        logit_f = np.log(np.clip(pt.f, _CLIP, 1 - _CLIP) /
                         (1 - np.clip(pt.f, _CLIP, 1 - _CLIP)))
        z += logit_f[codes]
        at += d
    return 1.0 / (1.0 + np.exp(-z))


def simulate_dataset(spec: ScenarioSpec, with_manifest: bool = False,
                     max_batches: int = 500):
    """Balanced dataset of exactly n/2 cases and n/2 controls.

    Effect SNPs occupy the first columns in component order, then noise SNPs.
    Returns the dataset, or (dataset, manifest) when ``with_manifest`` is set;
    the manifest records the component tables, noise MAFs and seed for
    provenance.
    """
    tables = component_tables(spec)
    _, noise_ss, sample_ss = _derived_seeds(spec)
    rng_noise = np.random.default_rng(noise_ss)
    rng = np.random.default_rng(sample_ss)

    n_noise = spec.q_total - spec.effect_count
    lo, hi = spec.noise_maf_range
    noise_mafs = rng_noise.uniform(lo, hi, n_noise)
    all_mafs = [m for c in spec.components for m in c.mafs] + list(noise_mafs)
    probs = np.array([hwe_probs(m) for m in all_mafs])

    half = spec.n // 2
    batch = max(2048, 2 * spec.n)
    kept_geno = []
    kept_pheno = []
    n_cases = n_controls = 0
    for _ in range(max_batches):
        g = _draw_genotypes(rng, probs, batch)
        pi = aggregate_penetrance(tables, g)
        y = (rng.random(batch) < pi).astype(np.int8)
        take_case = np.flatnonzero(y == 1)[: half - n_cases]
        take_ctrl = np.flatnonzero(y == 0)[: half - n_controls]
        take = np.sort(np.concatenate([take_case, take_ctrl]))
        kept_geno.append(g[take])
        kept_pheno.append(y[take])
        n_cases += take_case.size
        n_controls += take_ctrl.size
        if n_cases >= half and n_controls >= half:
            break
    else:
        raise InfeasibilityError(
            f"could not fill {half} cases and {half} controls in"
            f" {max_batches * batch} candidate draws"
        )

    ds = make_dataset(
        np.concatenate(kept_geno),
        np.concatenate(kept_pheno),
        levels=np.full(spec.q_total, 3, dtype=np.int64),
    )
    if not with_manifest:
        return ds
    manifest = {
        "seed": spec.seed,
        "n": spec.n,
        "q_total": spec.q_total,
        "noise_maf_range": list(spec.noise_maf_range),
        "components": [
            {
                "mafs": list(c.mafs),
                "target_h2": c.h2,
                "feature_columns": list(range(sum(len(cc.mafs) for cc in spec.components[:i]),
                                              sum(len(cc.mafs) for cc in spec.components[:i + 1]))),
                "penetrances": [float(v) for v in t.f],
                "prevalence": t.K,
                "heritability": t.h2,
            }
            for i, (c, t) in enumerate(zip(spec.components, tables))
        ],
        "noise_mafs": [float(m) for m in noise_mafs],
    }
    return ds, manifest

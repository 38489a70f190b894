import numpy as np
import pytest
from scipy.stats import chi2

from mbmdr import InfeasibilityError, hwe_probs, simulate_dataset
from mbmdr.simulate import (
    ComponentSpec,
    ScenarioSpec,
    aggregate_penetrance,
    build_scenario,
    component_tables,
)


def draw_hwe_genotypes(rng, mafs, count):
    """Independent genotype draws for the Monte Carlo oracles below."""
    probs = np.array([hwe_probs(m) for m in mafs])
    u = rng.random((count, len(mafs)))
    cut = probs.cumsum(axis=1)
    return ((u > cut[None, :, 0]).astype(int) + (u > cut[None, :, 1])).astype(np.int16)


class TestScenarioSpecs:
    def test_component_layouts(self):
        assert build_scenario(1, [0.4], 0.2, 200).components == (
            ComponentSpec((0.4,), 0.2),)
        spec = build_scenario(3, [0.2, 0.2], 0.1, 200)
        assert spec.components == (ComponentSpec((0.2, 0.2), 0.1),)
        spec = build_scenario(2, [0.1], 0.05, 200)
        assert len(spec.components) == 5
        assert all(c.mafs == (0.1,) for c in spec.components)

    def test_mixed_scenarios_default_singles(self):
        spec = build_scenario(4, [0.2, 0.2], 0.1, 200)
        assert [c.mafs for c in spec.components] == [
            (0.2, 0.2), (0.1,), (0.2,), (0.4,)]
        spec8 = build_scenario(8, None, 0.05, 200)
        assert [len(c.mafs) for c in spec8.components] == [3, 1, 1, 1]

    def test_null_scenario(self):
        spec = build_scenario(0, None, 0.1, 100, q=10)
        assert spec.components == ()

    def test_validation(self):
        with pytest.raises(ValueError, match="scenario"):
            build_scenario(9, [0.1], 0.1, 100)
        with pytest.raises(ValueError, match="MAF values"):
            build_scenario(3, [0.2], 0.1, 100)
        with pytest.raises(ValueError, match="even"):
            build_scenario(1, [0.2], 0.1, 101)
        with pytest.raises(ValueError, match="effect SNPs"):
            build_scenario(7, None, 0.1, 100, q=5)

    def test_scenario8_high_heritability_infeasible(self):
        spec = build_scenario(8, None, 0.2, 200, seed=1)
        with pytest.raises(InfeasibilityError):
            component_tables(spec)


class TestAggregation:
    def test_null_model_rate(self, rng):
        # no components: aggregated penetrance is exactly 0.5, so the raw
        # (pre-balancing) case rate is binomial around one half
        g = draw_hwe_genotypes(rng, [0.3] * 5, 10000)
        pi = aggregate_penetrance([], g)
        assert (pi == 0.5).all()
        y = rng.random(10000) < pi
        assert abs(y.mean() - 0.5) < 0.02

    def test_single_component_case_rates_match_table(self, rng):
        spec = build_scenario(1, [0.3], 0.1, 200, q=1, seed=5)
        (table,) = component_tables(spec)
        g = draw_hwe_genotypes(rng, [0.3], 100000)
        pi = aggregate_penetrance([table], g)
        y = (rng.random(100000) < pi).astype(int)
        for geno in range(3):
            sel = g[:, 0] == geno
            assert abs(y[sel].mean() - table.f[geno]) < 0.01

    def test_two_components_aggregate_on_logit_scale(self, rng):
        spec = build_scenario(5, [0.3, 0.3, 0.4, 0.4], 0.1, 200, q=4, seed=6)
        tables = component_tables(spec)
        g = draw_hwe_genotypes(rng, [0.3, 0.3, 0.4, 0.4], 50)
        pi = aggregate_penetrance(tables, g)
        # manual recomputation for a handful of samples
        for i in range(10):
            z = 0.0
            for t, cols in zip(tables, ((0, 1), (2, 3))):
                code = 3 * g[i, cols[0]] + g[i, cols[1]]
                fval = float(np.clip(t.f[code], 1e-12, 1 - 1e-12))
                z += np.log(fval / (1 - fval))
            assert pi[i] == pytest.approx(1 / (1 + np.exp(-z)), abs=1e-12)


class TestSimulateDataset:
    def test_balanced_and_deterministic(self):
        spec = build_scenario(3, [0.2, 0.2], 0.1, 500 * 2, q=30, seed=3)
        ds1 = simulate_dataset(spec)
        ds2 = simulate_dataset(spec)
        assert ds1.n_cases == ds1.n_controls == 500
        assert (ds1.genotypes == ds2.genotypes).all()
        assert (ds1.phenotype == ds2.phenotype).all()
        ds3 = simulate_dataset(build_scenario(3, [0.2, 0.2], 0.1, 1000, q=30, seed=4))
        assert (ds3.genotypes != ds1.genotypes).any()

    def test_levels_fixed_at_three(self):
        spec = build_scenario(0, None, 0.1, 60, q=5, seed=0)
        ds = simulate_dataset(spec)
        assert (ds.levels == 3).all()

    def test_manifest_provenance(self):
        spec = build_scenario(4, [0.2, 0.2], 0.1, 200, q=20, seed=9)
        ds, manifest = simulate_dataset(spec, with_manifest=True)
        assert manifest["seed"] == 9
        assert len(manifest["components"]) == 4
        assert manifest["components"][0]["feature_columns"] == [0, 1]
        assert len(manifest["noise_mafs"]) == 20 - 5
        for comp in manifest["components"]:
            assert abs(comp["prevalence"] - 0.5) < 1e-9
            assert abs(comp["heritability"] - 0.1) < 1e-6

    def test_noise_snps_are_null(self):
        # per-noise-SNP 1-df trend chi-squares should follow the null
        # distribution; their median sits near chi2(1)'s median 0.4549
        stats = []
        for rep in range(4):
            spec = build_scenario(3, [0.2, 0.2], 0.1, 2000, q=100, seed=40 + rep)
            ds = simulate_dataset(spec)
            g = ds.genotypes[:, 2:].astype(float)
            y = ds.phenotype.astype(float)
            n = ds.n
            # Cochran-Armitage trend statistic per SNP = n * corr(g, y)^2
            gc = g - g.mean(axis=0)
            yc = y - y.mean()
            num = (gc * yc[:, None]).sum(axis=0) ** 2
            den = (gc ** 2).sum(axis=0) * (yc ** 2).sum()
            stats.extend(n * num / den)
        median = float(np.median(stats))
        assert abs(median - chi2.ppf(0.5, 1)) < 0.1

    def test_rejection_budget(self):
        spec = ScenarioSpec((), q_total=3, n=20, seed=0)
        with pytest.raises(InfeasibilityError, match="candidate draws"):
            simulate_dataset(spec, max_batches=0)

import numpy as np
import pytest

from mbmdr import (
    EffectVector,
    InfeasibilityError,
    effects_to_penetrance,
    expit,
    generate_main_effect_table,
    generate_pure_epistasis_table,
    heritability,
    hwe_probs,
    logit,
    marginal_penetrance,
    penetrance_scale_effects,
    penetrance_to_effects,
    prevalence,
    table_from_mafs,
)

# the worked two-locus examples used throughout: a recessive-by-recessive
# table that is additive on the logit scale (TABLE_RECESSIVE) and an
# XOR-style table with flat marginals at MAF 0.5 (TABLE_XOR)
TABLE_RECESSIVE = np.array([0.62, 0.62, 0.82,
                            0.62, 0.62, 0.82,
                            0.73, 0.73, 0.88])
TABLE_XOR = np.array([0.0, 0.0, 1.0,
                      0.0, 0.5, 0.0,
                      1.0, 0.0, 0.0])


def brute_prevalence(f, probs):
    """9-cell (or 27-cell) sum with explicit loops, the hand-computation oracle."""
    d = probs.shape[0]
    total = 0.0
    for idx in np.ndindex(*(3,) * d):
        w = 1.0
        for j, g in enumerate(idx):
            w *= probs[j][g]
        total += w * f[np.ravel_multi_index(idx, (3,) * d)]
    return total


def brute_heritability(f, probs):
    K = brute_prevalence(f, probs)
    d = probs.shape[0]
    total = 0.0
    for idx in np.ndindex(*(3,) * d):
        w = 1.0
        for j, g in enumerate(idx):
            w *= probs[j][g]
        total += w * (f[np.ravel_multi_index(idx, (3,) * d)] - K) ** 2
    return total / (K * (1 - K))


class TestLogitExpit:
    def test_expit_center(self):
        assert expit(0.0) == 0.5

    def test_log_odds_of_recessive_table(self):
        # the table's distinct penetrances map to log-odds ~0.5/1/1.5/2
        assert logit(0.62) == pytest.approx(0.4895482253187058, abs=1e-12)
        assert logit(0.73) == pytest.approx(0.9946225751440621, abs=1e-12)
        assert logit(0.82) == pytest.approx(1.5163474893680885, abs=1e-12)
        assert logit(0.88) == pytest.approx(1.9924301646902063, abs=1e-12)

    def test_mutual_inverses(self, rng):
        p = rng.uniform(1e-6, 1 - 1e-6, size=1000)
        assert np.abs(expit(logit(p)) - p).max() < 1e-12

    def test_logit_domain(self):
        with pytest.raises(ValueError):
            logit(0.0)
        with pytest.raises(ValueError):
            logit(1.0)


class TestHwe:
    def test_half(self):
        assert hwe_probs(0.5) == (0.25, 0.5, 0.25)

    def test_quarter(self):
        p0, p1, p2 = hwe_probs(0.25)
        assert (p0, p1, p2) == (0.5625, 0.375, 0.0625)

    def test_sums_to_one(self, rng):
        for m in rng.uniform(0.01, 0.5, size=50):
            assert sum(hwe_probs(m)) == pytest.approx(1.0, abs=1e-15)

    def test_domain(self):
        with pytest.raises(ValueError):
            hwe_probs(0.0)
        with pytest.raises(ValueError):
            hwe_probs(0.6)


class TestPrevalenceHeritability:
    def test_xor_table_prevalence(self):
        pt = table_from_mafs((0.5, 0.5), TABLE_XOR)
        assert prevalence(pt) == 0.25
        assert brute_prevalence(TABLE_XOR, pt.genotype_probs) == 0.25

    def test_xor_table_heritability(self):
        pt = table_from_mafs((0.5, 0.5), TABLE_XOR)
        # brute 9-cell sums: numerator 0.125, denominator 0.1875
        assert brute_heritability(TABLE_XOR, pt.genotype_probs) == 2 / 3
        assert heritability(pt) == pytest.approx(2 / 3, abs=1e-15)

    def test_stored_fields_match_recomputation(self, rng):
        for _ in range(20):
            d = int(rng.integers(1, 3))
            mafs = tuple(rng.uniform(0.05, 0.5, size=d))
            f = rng.uniform(0.05, 0.95, size=3 ** d)
            pt = table_from_mafs(mafs, f)
            assert abs(pt.K - prevalence(pt)) < 1e-12
            assert abs(pt.h2 - heritability(pt)) < 1e-12

    def test_constant_table_zero_heritability(self):
        pt = table_from_mafs((0.3,), [0.4, 0.4, 0.4])
        assert heritability(pt) == pytest.approx(0.0, abs=1e-15)

    def test_undefined_heritability(self):
        pt = table_from_mafs((0.3,), [0.0, 0.0, 0.0])
        with pytest.raises(ValueError, match="undefined"):
            heritability(pt)


class TestMarginals:
    def test_xor_table_marginals_flat(self):
        pt = table_from_mafs((0.5, 0.5), TABLE_XOR)
        over_a = marginal_penetrance(pt, 0)  # marginal penetrance of B
        over_b = marginal_penetrance(pt, 1)  # marginal penetrance of A
        assert list(over_a.f) == [0.25, 0.25, 0.25]
        assert list(over_b.f) == [0.25, 0.25, 0.25]

    def test_constant_table(self):
        pt = table_from_mafs((0.2, 0.4), np.full(9, 0.3))
        assert np.allclose(marginal_penetrance(pt, 0).f, 0.3, atol=1e-15)

    def test_preserves_prevalence(self, rng):
        mafs = (0.15, 0.35)
        f = rng.uniform(0.1, 0.9, size=9)
        pt = table_from_mafs(mafs, f)
        assert prevalence(marginal_penetrance(pt, 1)) == pytest.approx(pt.K, abs=1e-14)


class TestEffectConversions:
    def test_additive_effects_reproduce_recessive_table(self):
        # intercept logit(0.62), recessive effects 0.5 and 1, no interaction:
        # the penetrances match the worked table at its 2-decimal precision
        ev = EffectVector(logit(0.62), {((0, 2),): 0.5, ((1, 2),): 1.0})
        f = effects_to_penetrance(ev, 2)
        assert np.abs(np.round(f, 2) - TABLE_RECESSIVE).max() <= 0.005 + 1e-12

    def test_zero_effects_constant_table(self):
        ev = EffectVector(0.3, {})
        f = effects_to_penetrance(ev, 2)
        assert np.allclose(f, expit(0.3), atol=1e-15)

    def test_recessive_table_is_logit_additive(self):
        ev = penetrance_to_effects(TABLE_RECESSIVE, 2)
        assert ev.effects[((0, 2),)] == pytest.approx(0.505, abs=5e-4)
        assert ev.effects[((1, 2),)] == pytest.approx(1.027, abs=5e-4)
        interactions = [v for k, v in ev.effects.items() if len(k) == 2]
        assert max(abs(v) for v in interactions) <= 0.03

    def test_penetrance_scale_deviation(self):
        # the same table on the probability scale shows the -0.05 deviation
        ev = penetrance_scale_effects(TABLE_RECESSIVE, 2)
        assert ev.effects[((0, 2), (1, 2))] == pytest.approx(-0.05, abs=1e-12)
        # scale effect: logit-additive but not penetrance-additive
        logit_ev = penetrance_to_effects(TABLE_RECESSIVE, 2)
        assert abs(logit_ev.effects[((0, 2), (1, 2))]) < 0.03

    def test_additive_by_construction_has_zero_interactions(self, rng):
        ev = EffectVector(0.2, {((0, 1),): 0.3, ((0, 2),): 0.7,
                               ((1, 1),): -0.2, ((1, 2),): 0.4})
        f = effects_to_penetrance(ev, 2)
        back = penetrance_to_effects(f, 2)
        for key, value in back.effects.items():
            if len(key) == 2:
                assert abs(value) < 1e-10

    def test_round_trip_identity(self, rng):
        for d in (1, 2):
            for _ in range(50):
                f = rng.uniform(0.02, 0.98, size=3 ** d)
                ev = penetrance_to_effects(f, d)
                back = effects_to_penetrance(ev, d)
                assert np.abs(back - f).max() < 1e-10

    def test_round_trip_three_loci_spot_check(self, rng):
        f = rng.uniform(0.05, 0.95, size=27)
        back = effects_to_penetrance(penetrance_to_effects(f, 3), 3)
        assert np.abs(back - f).max() < 1e-10

    def test_boundary_penetrance_rejected(self):
        with pytest.raises(ValueError):
            penetrance_to_effects(TABLE_XOR, 2)


class TestMainEffectGenerator:
    def test_hits_target(self):
        for maf in (0.1, 0.2, 0.4):
            for h2 in (0.05, 0.1, 0.2):
                pt = generate_main_effect_table(maf, h2)
                assert abs(pt.h2 - h2) < 1e-6
                assert abs(pt.K - 0.5) < 1e-9

    def test_monotone_penetrances(self):
        pt = generate_main_effect_table(0.4, 0.05)
        assert pt.f[0] < pt.f[1] < pt.f[2]

    def test_infeasible_target(self):
        # the additive-logit family saturates well below h2 = 0.9
        with pytest.raises(InfeasibilityError, match="unreachable"):
            generate_main_effect_table(0.1, 0.9)


class TestPureEpistasisGenerator:
    def test_high_heritability_at_maf_half(self):
        pt = generate_pure_epistasis_table((0.5, 0.5), 2 / 3, seed=1,
                                           max_tries=100000)
        assert abs(pt.h2 - 2 / 3) < 1e-6
        assert abs(pt.K - 0.5) < 1e-9

    def test_marginals_always_flat(self, rng):
        for seed in range(5):
            mafs = tuple(rng.choice([0.2, 0.3, 0.4, 0.5], size=2))
            pt = generate_pure_epistasis_table(mafs, 0.1, seed=seed)
            for drop in (0, 1):
                marg = marginal_penetrance(pt, drop)
                assert np.abs(marg.f - marg.f[0]).max() < 1e-9

    def test_three_locus_strictness(self):
        # d=3 tables have flat single-locus AND flat two-locus marginals
        pt = generate_pure_epistasis_table((0.2, 0.3, 0.4), 0.05, seed=3)
        for drop in (0, 1, 2):
            two = marginal_penetrance(pt, drop)
            assert np.abs(two.f - 0.5).max() < 1e-9
            for drop2 in (0, 1):
                one = marginal_penetrance(two, drop2)
                assert np.abs(one.f - 0.5).max() < 1e-9

    def test_reports_best_achievable_on_failure(self):
        # mirrors the benchmark's three-locus failure: h2 = 0.2 is out of
        # reach at MAFs (0.1, 0.2, 0.4) under strict zero marginals
        with pytest.raises(InfeasibilityError, match="largest achievable"):
            generate_pure_epistasis_table((0.1, 0.2, 0.4), 0.2, seed=0,
                                          max_tries=1500)

    def test_deterministic_per_seed(self):
        a = generate_pure_epistasis_table((0.3, 0.3), 0.1, seed=7)
        b = generate_pure_epistasis_table((0.3, 0.3), 0.1, seed=7)
        assert (a.f == b.f).all()

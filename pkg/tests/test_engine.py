"""Estimator correctness: MC vs enumeration, grids, densities, sweeps, ratios."""

import math

import numpy as np
import pytest

from bvm import (
    AlwaysFalse,
    AlwaysTrue,
    And,
    Categorical,
    DiracDelta,
    GammaEpsilon,
    IndependentProduct,
    InputGrid,
    Interval,
    Normal,
    Or,
    Scenario,
    ShiftedExponential,
    SoftExponential,
    SweepGrid,
    SweepTemplate,
    Threshold,
    averaged_boolean_ratio,
    bvm_factor,
    bvm_from_density,
    bvm_ratio,
    comparison_density,
    estimate_bvm_grid,
    estimate_bvm_mc,
    polynomial_model,
    ratio_grid,
    sweep,
)
from bvm.engine import EstimationError, RatioResult, weighted_paths
from bvm.rng import DATA_STREAM, TOLERANCE_STREAM


def enumeration_oracle(model: Categorical, data: Categorical, rule) -> float:
    """Exact double sum over the two finite supports."""
    total = 0.0
    for mv, mp in zip(model.values, model.probs):
        for dv, dp in zip(data.values, data.probs):
            total += mp * dp * rule.kernel(mv, dv)
    return total


class TestMonteCarlo:
    def test_always_true_is_exactly_one(self):
        sc = Scenario(Normal(0, 1), Normal(0, 1), AlwaysTrue())
        est = estimate_bvm_mc(sc, 500, 0)
        assert est.p_hat == 1.0
        assert est.std_error == 0.0

    def test_certain_exact_agreement(self):
        rule = Threshold("abs_diff", 0.0)
        agree = estimate_bvm_mc(Scenario(DiracDelta(2.0), DiracDelta(2.0), rule), 100, 0)
        disagree = estimate_bvm_mc(Scenario(DiracDelta(2.0), DiracDelta(3.0), rule), 100, 0)
        assert agree.p_hat == 1.0
        assert disagree.p_hat == 0.0

    def test_categorical_matches_enumeration(self):
        model = Categorical([0.0, 1.0, 2.0], [1 / 3, 1 / 3, 1 / 3])
        data = Categorical([1.0], [1.0])
        rule = Threshold("abs_diff", 0.0)
        exact = enumeration_oracle(model, data, rule)
        assert exact == pytest.approx(1 / 3)
        est = estimate_bvm_mc(Scenario(model, data, rule), 30_000, 5)
        assert abs(est.p_hat - exact) <= 3 * est.std_error

    def test_determinism_and_thread_invariance(self, monkeypatch):
        sc = Scenario(Normal(0, 1), Normal(0.5, 2.0), Threshold("abs_diff", 0.8))
        monkeypatch.setenv("BVM_THREADS", "1")
        serial = estimate_bvm_mc(sc, 50_000, 9)
        monkeypatch.setenv("BVM_THREADS", "8")
        threaded = estimate_bvm_mc(sc, 50_000, 9)
        assert serial.p_hat == threaded.p_hat
        assert serial.std_error == threaded.std_error

    def test_and_or_inequalities_on_shared_samples(self):
        a = Threshold("abs_diff", 0.4)
        b = Interval("identity", -0.3, 1.2)
        model, data = Normal(0, 1), Normal(0.2, 0.8)
        seed, k = 17, 40_000
        p_a = estimate_bvm_mc(Scenario(model, data, a), k, seed).p_hat
        p_b = estimate_bvm_mc(Scenario(model, data, b), k, seed).p_hat
        p_and = estimate_bvm_mc(Scenario(model, data, And([a, b])), k, seed).p_hat
        p_or = estimate_bvm_mc(Scenario(model, data, Or([a, b])), k, seed).p_hat
        assert p_and <= min(p_a, p_b)
        assert p_or >= max(p_a, p_b)
        assert p_and + p_or == pytest.approx(p_a + p_b, abs=1e-12)

    def test_eps_monotone_at_fixed_seed(self):
        model, data = Normal(0, 1), Normal(0.3, 1.5)
        prev = 0.0
        for eps in np.linspace(0, 2.5, 21):
            p = estimate_bvm_mc(Scenario(model, data, Threshold("abs_diff", eps)), 20_000, 3).p_hat
            assert p >= prev
            prev = p

    def test_soft_rule_uses_sample_variance(self):
        rule = SoftExponential("abs_diff", 0.2, 1.0)
        est = estimate_bvm_mc(Scenario(Normal(0, 1), DiracDelta(0.0), rule), 10_000, 0)
        assert 0.0 < est.p_hat < 1.0
        assert est.std_error > 0.0

    def test_soft_closed_form_matches_nested_two_level_mc(self):
        # The soft kernel is the closed-form marginalisation of a hard
        # threshold whose tolerance is shifted-exponential. Re-inflate the
        # marginal by drawing tolerances explicitly and compare.
        eps_prime, lam = 0.3, 2.5
        model, data = Normal(0, 1), DiracDelta(0.0)
        k, seed = 120_000, 21
        soft = estimate_bvm_mc(Scenario(model, data, SoftExponential("abs_diff", eps_prime, lam)), k, seed)
        f = np.abs(model.sample(seed, k, stream=0) - data.sample(seed, k, stream=DATA_STREAM))
        eps_draws = ShiftedExponential(lam, eps_prime).sample(seed, k, stream=TOLERANCE_STREAM)
        nested = (f <= eps_draws).astype(float)
        p_nested = nested.mean()
        se_nested = math.sqrt(p_nested * (1 - p_nested) / k)
        combined = math.hypot(soft.std_error, se_nested)
        assert abs(soft.p_hat - p_nested) <= 3 * combined

    def test_joint_sampler_override(self):
        def sampler(seed, n):
            x = Normal(0, 1).sample(seed, n, stream=0)
            return x, x  # perfectly correlated

        sc = Scenario(Normal(0, 1), Normal(0, 1), Threshold("abs_diff", 1e-9), joint_sampler=sampler)
        assert estimate_bvm_mc(sc, 1000, 0).p_hat == 1.0

    def test_sample_count_validation(self):
        with pytest.raises(EstimationError):
            estimate_bvm_mc(Scenario(Normal(0, 1), Normal(0, 1), AlwaysTrue()), 0, 0)


class TestGridEstimator:
    def test_single_certain_pair(self):
        path = np.array([1.0, 2.0, 3.0])
        sc = Scenario(DiracDelta(path), DiracDelta(path), Threshold("max_abs_error", 0.0))
        est = estimate_bvm_grid(sc, ([path], [1.0]), ([path], [1.0]))
        assert est.p_hat == 1.0
        assert est.method == "grid"
        assert est.std_error == 0.0

    def test_two_equiprobable_paths(self):
        path = np.array([0.0, 0.0])
        other = np.array([9.0, 9.0])
        sc = Scenario(DiracDelta(path), DiracDelta(path), Threshold("max_abs_error", 0.1))
        est = estimate_bvm_grid(sc, ([path, other], [0.5, 0.5]), ([path], [1.0]))
        assert est.p_hat == 0.5

    def test_weight_normalisation_enforced(self):
        path = np.zeros(2)
        sc = Scenario(DiracDelta(path), DiracDelta(path), AlwaysTrue())
        with pytest.raises(EstimationError):
            estimate_bvm_grid(sc, ([path], [0.7]), ([path], [1.0]))

    def test_matches_enumeration_for_categoricals(self):
        model = Categorical([0.0, 1.0, 2.0], [0.5, 0.25, 0.25])
        data = Categorical([0.0, 2.0], [0.4, 0.6])
        rule = Threshold("abs_diff", 1.0)
        exact = enumeration_oracle(model, data, rule)
        est = estimate_bvm_grid(
            Scenario(model, data, rule),
            (list(model.values), list(model.probs)),
            (list(data.values), list(data.probs)),
        )
        assert est.p_hat == pytest.approx(exact, abs=1e-15)

    def test_label_grids_with_synonym_rule(self):
        from bvm import SetMembership

        model = Categorical(["feline", "dog"], [0.6, 0.4])
        data = Categorical(["cat"], [1.0])
        rule = SetMembership({"cat": ("cat", "feline")})
        est = estimate_bvm_grid(
            Scenario(model, data, rule),
            (list(model.values), list(model.probs)),
            (list(data.values), list(data.probs)),
        )
        assert est.p_hat == pytest.approx(0.6)
        mc = estimate_bvm_mc(Scenario(model, data, rule), 20_000, 0)
        assert abs(mc.p_hat - 0.6) <= 3 * mc.std_error


class TestComparisonDensity:
    def test_dirac_pair_single_bin(self):
        sc = Scenario(DiracDelta(2.0), DiracDelta(3.5), AlwaysTrue())
        dens = comparison_density(sc, "abs_diff", 1000, 16, 0)
        assert dens.masses.sum() == pytest.approx(1.0)
        hot = np.flatnonzero(dens.masses)
        assert hot.size == 1
        lo, hi = dens.bin_edges[hot[0]], dens.bin_edges[hot[0] + 1]
        assert lo <= 1.5 <= hi

    def test_identity_statistic_recovers_model_density(self):
        sc = Scenario(Normal(0, 1), DiracDelta(0.0), AlwaysTrue())
        dens = comparison_density(sc, "identity", 100_000, 64, 2)
        from scipy.stats import norm

        cdf_emp = np.cumsum(dens.masses)
        cdf_true = norm.cdf(dens.bin_edges[1:])
        assert np.max(np.abs(cdf_emp - cdf_true)) < 0.02

    def test_masses_always_sum_to_one(self):
        sc = Scenario(Normal(0, 1), Normal(1, 2), AlwaysTrue())
        for bins in (8, 64):
            dens = comparison_density(sc, "abs_diff", 5000, bins, 1)
            assert dens.masses.sum() == pytest.approx(1.0, abs=1e-12)

    def test_needs_enough_samples(self):
        sc = Scenario(Normal(0, 1), Normal(0, 1), AlwaysTrue())
        with pytest.raises(EstimationError):
            comparison_density(sc, "abs_diff", 10, 16, 0)


class TestBvmFromDensity:
    def test_trivial_rules(self):
        sc = Scenario(Normal(0, 1), Normal(0.5, 0.5), AlwaysTrue())
        dens = comparison_density(sc, "abs_diff", 20_000, 64, 4)
        assert bvm_from_density(dens, AlwaysTrue()) == pytest.approx(1.0)
        assert bvm_from_density(dens, AlwaysFalse()) == 0.0

    def test_consistent_with_direct_mc(self):
        # Same seed, same samples: the two routes may only disagree by the
        # mass of the bin containing the threshold.
        eps = 0.8
        model, data = Normal(0, 1), Normal(0.3, 0.7)
        seed, k, bins = 6, 100_000, 64
        direct = estimate_bvm_mc(Scenario(model, data, Threshold("abs_diff", eps)), k, seed)
        dens = comparison_density(Scenario(model, data, AlwaysTrue()), "abs_diff", k, bins, seed)
        via_density = bvm_from_density(dens, Threshold("identity", eps))
        idx = np.searchsorted(dens.bin_edges, eps) - 1
        boundary_mass = dens.masses[max(idx, 0)]
        assert abs(via_density - direct.p_hat) <= boundary_mass + 1e-12


class TestRatios:
    def test_factor_statuses(self):
        assert bvm_factor(0.5, 0.25) == RatioResult("ok", 2.0)
        assert bvm_factor(0.0, 0.0).status == "indeterminate"
        assert bvm_factor(1.0, 0.0).status == "infinite"
        assert bvm_factor(0.0, 0.4) == RatioResult("ok", 0.0)

    def test_ratio_prior_scaling(self):
        k = bvm_factor(0.5, 0.25)
        assert bvm_ratio(k, 1.0, 1.0).value == pytest.approx(2.0)
        assert bvm_ratio(k, 1.0, 2.0).value == pytest.approx(1.0)
        assert bvm_ratio(bvm_factor(0.0, 0.0), 1.0, 2.0).status == "indeterminate"
        with pytest.raises(ValueError):
            bvm_ratio(k, 0.0, 1.0)


def small_template(seed=0, uncertain=True, n_points=12, points_per_param=7):
    grid = InputGrid.linspace(0.0, 2.0, n_points)
    data = np.cos(grid.points)
    model = polynomial_model([0, 2])
    if uncertain:
        prior = IndependentProduct([Normal(1.0, 0.2), Normal(-0.5, 0.1)])
    else:
        prior = IndependentProduct([DiracDelta(1.0), DiracDelta(-0.5)])
    return SweepTemplate(model, prior, grid, data, grid_points_per_param=points_per_param)


class TestSweep:
    def test_matches_cellwise_grid_estimates(self):
        # Dual route: the optimised sweep must equal running the plain grid
        # estimator with the (gamma, eps) rule at every cell.
        template = small_template()
        gammas = np.array([0.5, 0.8, 1.0])
        epsilons = np.array([0.0, 0.2, 0.5, 1.1])
        grid = sweep(template, gammas, epsilons, m=3.0)
        paths, weights = weighted_paths(template, "grid")
        data_grid = ([template.data_path], [1.0])
        for i, g in enumerate(gammas):
            for j, e in enumerate(epsilons):
                rule = GammaEpsilon(g, e, 3.0)
                sc = Scenario(DiracDelta(template.data_path), DiracDelta(template.data_path), rule)
                direct = estimate_bvm_grid(sc, (paths, weights), data_grid)
                assert grid.values[i, j] == pytest.approx(direct.p_hat, abs=1e-12)

    def test_monotone_axes(self):
        grid = sweep(small_template(), np.linspace(0.5, 1.0, 6), np.linspace(0, 1.5, 16), m=5.0)
        assert np.all(np.diff(grid.values, axis=0) <= 1e-12)  # stricter gamma never helps
        assert np.all(np.diff(grid.values, axis=1) >= -1e-12)  # looser eps never hurts

    def test_deterministic_cells_are_binary(self):
        grid = sweep(small_template(uncertain=False), np.linspace(0.75, 1.0, 6), np.linspace(0, 1, 21), m=5.0)
        assert np.isin(grid.values, (0.0, 1.0)).all()

    def test_mc_estimator_close_to_grid(self):
        template = small_template(points_per_param=20)
        gammas = np.array([0.8])
        epsilons = np.array([0.3])
        g_grid = sweep(template, gammas, epsilons, m=5.0, estimator="grid")
        g_mc = sweep(template, gammas, epsilons, m=5.0, estimator="mc", k=40_000, seed=1)
        se = math.sqrt(max(g_mc.values[0, 0] * (1 - g_mc.values[0, 0]), 1e-9) / 40_000)
        # The 20-point lattice truncates the prior at +/-3 sigma, so a
        # small systematic gap rides on top of the MC error.
        assert abs(g_grid.values[0, 0] - g_mc.values[0, 0]) <= 4 * se + 0.02

    def test_empty_axes_rejected(self):
        with pytest.raises(EstimationError):
            sweep(small_template(), [], [0.1], m=5.0)


class TestGridRatios:
    def test_identical_grids(self):
        grid = sweep(small_template(), np.linspace(0.75, 1.0, 4), np.linspace(0, 1, 6), m=5.0)
        assert averaged_boolean_ratio(grid, grid).value == pytest.approx(1.0)
        cells = ratio_grid(grid, grid)
        for row in cells:
            for cell in row:
                assert cell.status in ("ok", "indeterminate")
                if cell.status == "ok":
                    assert cell.value == pytest.approx(1.0)

    def test_axis_mismatch_rejected(self):
        g1 = sweep(small_template(), [0.8], [0.1, 0.2], m=5.0)
        g2 = sweep(small_template(), [0.9], [0.1, 0.2], m=5.0)
        with pytest.raises(EstimationError):
            averaged_boolean_ratio(g1, g2)

    def test_indeterminate_total(self):
        g = SweepGrid(np.array([1.0]), np.array([0.0]), np.array([[0.0]]))
        assert averaged_boolean_ratio(g, g).status == "indeterminate"

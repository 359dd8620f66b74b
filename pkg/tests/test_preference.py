"""Utilities, the Boltzmann choice model, and the preference posterior."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pareto_pilot.front import CurveKind, FrontParams, eval_front
from pareto_pilot.particles import WeightedParticles
from pareto_pilot.preference import (
    ChoiceRecord,
    CurveQuery,
    PairQuery,
    PreferenceWeights,
    PrefPosterior,
    TradeOffPoint,
    UserModelConfig,
    chebyshev_utility,
    choice_log_probs,
    exp_linear_utility,
    init_pref_posterior,
    linear_utility,
    make_curve_query,
    pref_error,
    sample_weight_prior,
    simulate_choice,
    update_pref_posterior,
)

W_HALF = PreferenceWeights(0.5, 0.5)


class TestWeights:
    def test_must_sum_to_one(self):
        with pytest.raises(ValueError):
            PreferenceWeights(0.5, 0.6)

    def test_strict_positivity(self):
        with pytest.raises(ValueError):
            PreferenceWeights(0.0, 1.0)
        with pytest.raises(ValueError):
            PreferenceWeights(1.0, 0.0)


class TestChebyshev:
    def test_reference_values(self):
        assert chebyshev_utility(TradeOffPoint(0.4, 0.8), W_HALF) == pytest.approx(0.8)
        w = PreferenceWeights(0.3, 0.7)
        assert chebyshev_utility(TradeOffPoint(1.0, 1.0), w) == pytest.approx(1 / 0.7)
        assert chebyshev_utility(TradeOffPoint(0.0, 0.9), w) == 0.0

    @given(
        p=st.floats(0.0, 1.0),
        a=st.floats(0.0, 1.0),
        w1=st.floats(0.05, 0.95),
        s=st.floats(0.01, 1.0),
    )
    def test_scale_equivariance(self, p, a, w1, s):
        w = PreferenceWeights(w1, 1 - w1)
        u1 = chebyshev_utility(TradeOffPoint(p, a), w)
        u2 = chebyshev_utility(TradeOffPoint(p * s, a * s), w)
        assert u2 == pytest.approx(s * u1, rel=1e-12, abs=1e-12)


class TestOtherUtilities:
    def test_linear_values(self):
        assert linear_utility(TradeOffPoint(1.0, 1.0), PreferenceWeights(0.2, 0.8)) == 1.0
        assert linear_utility(TradeOffPoint(0.3, 0.7), W_HALF) == pytest.approx(0.5)

    def test_exp_linear_values(self):
        assert exp_linear_utility(0.0, 1.0, PreferenceWeights(0.4, 0.6)) == pytest.approx(1.0)
        with pytest.raises(ValueError):
            exp_linear_utility(float("nan"), 0.5, W_HALF)


def uniform_query(q=5):
    """Query whose points all share the same utility for every weight vector."""
    pt = TradeOffPoint(0.5, 0.5)
    pars = FrontParams(CurveKind.SIGMOID, L=0.9, k=10.0, b=0.05, c=0.5)
    return CurveQuery(params=pars, points=tuple([pt] * q))


class TestChoiceModel:
    def test_equal_utilities_give_uniform(self):
        lp = choice_log_probs(uniform_query(5), W_HALF, 0.2)
        np.testing.assert_allclose(np.exp(lp), 0.2, atol=1e-12)

    def test_low_temperature_concentrates_on_argmax(self):
        query = make_curve_query(FrontParams(CurveKind.SIGMOID, 0.9, 10.0, 0.05, 0.5), 21)
        lp = choice_log_probs(query, PreferenceWeights(0.3, 0.7), 1e-9)
        probs = np.exp(lp)
        assert probs.max() > 1 - 1e-6

    def test_logistic_identity(self):
        # two options whose utility gap is T log 3 -> probabilities 1:3
        T = 0.2
        a = TradeOffPoint(0.4, 0.4)  # U = 0.8 under equal weights
        gap = T * math.log(3.0)
        b = TradeOffPoint(0.4 + gap / 2, 0.4 + gap / 2)
        lp = choice_log_probs(PairQuery((a, b)), W_HALF, T)
        np.testing.assert_allclose(np.exp(lp), [0.25, 0.75], atol=1e-12)

    @given(
        w1=st.floats(0.1, 0.9),
        T=st.floats(0.01, 5.0),
        seed=st.integers(0, 2**16),
    )
    def test_probabilities_normalize(self, w1, T, seed):
        rng = np.random.default_rng(seed)
        pars = FrontParams(CurveKind.SIGMOID, 0.9, float(rng.uniform(2, 30)), 0.05, 0.5)
        lp = choice_log_probs(make_curve_query(pars, 31), PreferenceWeights(w1, 1 - w1), T)
        assert abs(np.exp(lp).sum() - 1.0) < 1e-12

    def test_shift_invariance(self):
        # Chebyshev utilities shift by a constant when both axes gain the same
        # offset in utility space; emulate by direct comparison of softmax.
        rng = np.random.default_rng(0)
        u = rng.uniform(0, 2, 11)
        from scipy.special import log_softmax

        lp1 = log_softmax(u / 0.2)
        lp2 = log_softmax((u + 5.0) / 0.2)
        np.testing.assert_allclose(np.exp(lp1), np.exp(lp2), atol=1e-12)

    def test_simulate_equal_utilities_frequency(self):
        rng = np.random.default_rng(0)
        pt = TradeOffPoint(0.5, 0.5)
        query = PairQuery((pt, pt))
        draws = np.array([simulate_choice(query, W_HALF, 0.2, rng) for _ in range(100_000)])
        freq = np.mean(draws == 0)
        assert abs(freq - 0.5) < 3 * math.sqrt(0.25 / 100_000)

    def test_simulate_zero_temperature_always_argmax(self):
        rng = np.random.default_rng(1)
        query = make_curve_query(FrontParams(CurveKind.SIGMOID, 0.9, 8.0, 0.05, 0.5), 41)
        w = PreferenceWeights(0.6, 0.4)
        lp = choice_log_probs(query, w, 1e-9)
        argmax = int(np.argmax(lp))
        assert all(simulate_choice(query, w, 1e-9, rng) == argmax for _ in range(50))

    def test_simulated_frequencies_match_probabilities(self):
        rng = np.random.default_rng(2)
        query = make_curve_query(FrontParams(CurveKind.SIGMOID, 0.85, 12.0, 0.1, 0.45), 7)
        w = PreferenceWeights(0.35, 0.65)
        probs = np.exp(choice_log_probs(query, w, 0.3))
        n = 60_000
        draws = np.array([simulate_choice(query, w, 0.3, rng) for _ in range(n)])
        for j, pj in enumerate(probs):
            se = math.sqrt(max(pj * (1 - pj), 1e-12) / n)
            assert abs(np.mean(draws == j) - pj) <= 3 * se + 1e-9


class TestWeightPrior:
    def test_moments_and_support(self):
        rng = np.random.default_rng(0)
        draws = np.array([sample_weight_prior(rng).w1 for _ in range(100_000)])
        se_mean = math.sqrt(0.05 / 100_000)
        assert abs(draws.mean() - 0.5) < 3 * se_mean
        # Var of Beta(2,2) is 0.05; compare sample variance at 3 SEs
        var = draws.var(ddof=1)
        se_var = math.sqrt(2 / (100_000 - 1)) * 0.05
        assert abs(var - 0.05) < 3 * se_var
        assert draws.min() > 0.0 and draws.max() < 1.0


class TestPrefPosterior:
    def test_uninformative_record_leaves_weights(self):
        rng = np.random.default_rng(3)
        post = init_pref_posterior(200, rng)
        record = ChoiceRecord(uniform_query(9), 4)
        updated = update_pref_posterior(post, record, 0.2)
        np.testing.assert_allclose(updated.weights, post.weights, atol=1e-14)

    def test_repeated_identical_choices_concentrate(self):
        rng = np.random.default_rng(4)
        post = init_pref_posterior(500, rng)
        query = make_curve_query(FrontParams(CurveKind.SIGMOID, 0.9, 10.0, 0.02, 0.5), 51)
        record = ChoiceRecord(query, 35)
        ess = post.particles.effective_sample_size()
        for _ in range(10):
            post = update_pref_posterior(post, record, 0.2)
            new_ess = post.particles.effective_sample_size()
            assert new_ess < ess
            ess = new_ess

    def test_batch_vs_sequential(self):
        rng = np.random.default_rng(5)
        post = init_pref_posterior(300, rng)
        query = make_curve_query(FrontParams(CurveKind.SIGMOID, 0.9, 10.0, 0.02, 0.5), 31)
        r1, r2 = ChoiceRecord(query, 5), ChoiceRecord(query, 25)
        seq = update_pref_posterior(update_pref_posterior(post, r1, 0.2), r2, 0.2)
        swapped = update_pref_posterior(update_pref_posterior(post, r2, 0.2), r1, 0.2)
        np.testing.assert_allclose(seq.weights, swapped.weights, atol=1e-10)

    def test_unnormalized_ratio_equals_likelihood_ratio(self):
        rng = np.random.default_rng(6)
        post = init_pref_posterior(50, rng)
        query = make_curve_query(FrontParams(CurveKind.SIGMOID, 0.9, 10.0, 0.02, 0.5), 21)
        record = ChoiceRecord(query, 10)
        updated = update_pref_posterior(post, record, 0.2)
        lik = np.array(
            [
                math.exp(choice_log_probs(query, post.particle_at(i), 0.2)[10])
                for i in range(50)
            ]
        )
        ratio_w = updated.weights / updated.weights[0]
        ratio_expected = (post.weights * lik) / (post.weights[0] * lik[0])
        np.testing.assert_allclose(ratio_w, ratio_expected, rtol=1e-9)

    def test_invalid_choice_index(self):
        with pytest.raises(ValueError):
            ChoiceRecord(uniform_query(5), 5)


class TestPrefError:
    def test_point_mass_at_truth_is_zero(self):
        w = PreferenceWeights(0.3, 0.7)
        assert pref_error(PrefPosterior.point_mass(w), w) == 0.0

    def test_opposite_point_mass(self):
        e = 0.1
        post = PrefPosterior.point_mass(PreferenceWeights(1 - e, e))
        err = pref_error(post, PreferenceWeights(e, 1 - e))
        assert err == pytest.approx(math.sqrt(2) * abs(1 - 2 * e))

    def test_two_particle_average(self):
        values = np.array([[0.2, 0.8], [0.6, 0.4]])
        post = PrefPosterior(WeightedParticles.uniform(values))
        w_true = PreferenceWeights(0.4, 0.6)
        d = [float(np.linalg.norm(v - w_true.as_array())) for v in values]
        assert pref_error(post, w_true) == pytest.approx(sum(d) / 2)


class TestQueryConstruction:
    def test_make_curve_query_clamps_and_sorts(self):
        pars = FrontParams(CurveKind.GOMPERTZ, L=4.0, k=50.0, b=1.1, c=6.0)
        query = make_curve_query(pars, 101)
        assert query.q == 101
        ps = [pt.p for pt in query.points]
        assert ps == sorted(ps)
        assert all(0.0 <= pt.alpha <= 1.0 for pt in query.points)

    def test_user_model_config_validation(self):
        with pytest.raises(ValueError):
            UserModelConfig(T=0.0)
        with pytest.raises(ValueError):
            UserModelConfig(q=1)

    def test_points_preserved_exactly(self):
        pars = FrontParams(CurveKind.SIGMOID, 0.9, 10.0, 0.02, 0.5)
        query = make_curve_query(pars, 11)
        grid = np.linspace(0, 1, 11)
        expected = np.clip(eval_front(grid, pars), 0, 1)
        np.testing.assert_array_equal(query.points_array()[:, 1], expected)

"""Count-based estimators: exact identities, the bias law, reweighting."""

import math
from fractions import Fraction
from math import comb

import numpy as np
import pytest

from gibbsabc.errors import EstimatorUndefinedError, InputError, NoAcceptanceError
from gibbsabc.estimators import (
    JeffreysCategory,
    ModelCounts,
    bf_bias,
    bf_plugin,
    bf_reweighted,
    bf_smoothed,
    jeffreys_category,
    posterior_prob_hat,
    two_step_rho,
)
from gibbsabc.samplers import ModelPrior

EQUAL = ModelPrior.equal(2)


class TestPosteriorProbHat:
    def test_basic(self):
        assert posterior_prob_hat(ModelCounts((30, 70)), 0) == pytest.approx(0.3)

    def test_zero_count(self):
        assert posterior_prob_hat(ModelCounts((0, 5)), 0) == 0.0

    def test_empty_run(self):
        with pytest.raises(NoAcceptanceError):
            posterior_prob_hat(ModelCounts((0, 0)), 0)


class TestBfPlugin:
    def test_basic(self):
        assert bf_plugin(ModelCounts((60, 30)), EQUAL).value == pytest.approx(2.0)

    def test_undefined(self):
        with pytest.raises(EstimatorUndefinedError):
            bf_plugin(ModelCounts((10, 0)), EQUAL)

    def test_prior_odds(self):
        prior = ModelPrior((0.25, 0.75))
        assert bf_plugin(ModelCounts((50, 50)), prior).value == pytest.approx(3.0)


class TestBfSmoothed:
    def test_basic(self):
        est = bf_smoothed(ModelCounts((9, 4)), EQUAL)
        assert est.value == pytest.approx(2.0)
        assert est.kind == "smoothed"

    def test_no_acceptances_returns_prior_odds(self):
        assert bf_smoothed(ModelCounts((0, 0)), EQUAL).value == pytest.approx(1.0)

    def test_prior_odds_factor(self):
        prior = ModelPrior((1 / 3, 2 / 3))
        assert bf_smoothed(ModelCounts((9, 4)), prior).value == pytest.approx(4.0)

    def test_dirichlet_posterior_mean_identity(self):
        # with a flat Dirichlet the posterior mean of p_j is (N_j+1)/(N+M),
        # so the smoothed estimate must equal the ratio of posterior means
        # exactly, for every count vector (rational arithmetic, then one
        # correctly rounded float on each side)
        for n0 in range(0, 40, 3):
            for n1 in range(0, 40, 7):
                value = bf_smoothed(ModelCounts((n0, n1)), EQUAL).value
                mean0 = Fraction(n0 + 1, n0 + n1 + 2)
                mean1 = Fraction(n1 + 1, n0 + n1 + 2)
                assert value == float(mean0 / mean1)


def _enumerated_bias(p: float, n: int) -> float:
    """Independent oracle: exhaust the binomial law of N1 given N = n."""
    expectation = sum(
        comb(n, k) * p**k * (1 - p) ** (n - k) * (n - k + 1) / (k + 1)
        for k in range(n + 1)
    )
    return expectation - (1 - p) / p


class TestBfBias:
    def test_p_one(self):
        assert bf_bias(1.0, 9) == pytest.approx(0.1)

    def test_matches_enumeration_n20(self):
        assert bf_bias(0.5, 20) == pytest.approx(_enumerated_bias(0.5, 20), abs=1e-12)

    def test_matches_enumeration_grid(self):
        for n in range(0, 26):
            for p in (0.1, 0.3, 0.5, 0.7, 0.9):
                assert bf_bias(p, n) == pytest.approx(_enumerated_bias(p, n), abs=1e-12)

    def test_vanishes_for_large_n(self):
        assert bf_bias(0.5, 10_000) < 1e-3

    def test_domain(self):
        with pytest.raises(InputError):
            bf_bias(0.0, 5)
        with pytest.raises(InputError):
            bf_bias(0.5, -1)


class TestBfReweighted:
    def test_basic(self):
        assert bf_reweighted(ModelCounts((50, 50)), 0.9).value == pytest.approx(9.0)

    def test_skewed(self):
        assert bf_reweighted(ModelCounts((0, 99)), 0.99).value == pytest.approx(0.99)

    def test_half_reduces_to_smoothed(self):
        counts = ModelCounts((17, 5))
        assert bf_reweighted(counts, 0.5).value == bf_smoothed(counts, EQUAL).value

    def test_domain(self):
        with pytest.raises(InputError):
            bf_reweighted(ModelCounts((1, 1)), 1.0)

    def test_reweighting_consistency(self):
        # synthetic accepted counts from one underlying posterior: the
        # reweighted estimators at rho in {.5, .9} and the smoothed one at
        # rho = .5 must agree within Monte Carlo error at N = 1e5
        rng = np.random.default_rng(2024)
        bf_true = 4.0
        p1 = 1 / (1 + bf_true)  # equal-prior acceptance share of model 1
        n_acc = 100_000
        estimates = []
        ses = []
        for rho in (0.5, 0.9):
            share1 = rho * p1 / (rho * p1 + (1 - rho) * (1 - p1))
            n1 = int(rng.binomial(n_acc, share1))
            counts = ModelCounts((n_acc - n1, n1))
            est = bf_reweighted(counts, rho)
            estimates.append(math.log(est.value))
            ses.append(math.sqrt(1 / (counts.counts[0] + 1) + 1 / (counts.counts[1] + 1)))
        n1 = int(rng.binomial(n_acc, p1))
        smoothed = bf_smoothed(ModelCounts((n_acc - n1, n1)), EQUAL)
        estimates.append(math.log(smoothed.value))
        ses.append(math.sqrt(1 / (n_acc - n1 + 1) + 1 / (n1 + 1)))
        for i in range(3):
            for j in range(i + 1, 3):
                gap = abs(estimates[i] - estimates[j])
                assert gap < 3 * math.hypot(ses[i], ses[j])
                assert abs(estimates[i] - math.log(bf_true)) < 3 * ses[i]


class TestTwoStepRho:
    def test_symmetric(self):
        assert two_step_rho(ModelCounts((10, 10))) == pytest.approx(0.5)

    def test_lopsided(self):
        assert two_step_rho(ModelCounts((97, 1))) == pytest.approx(0.98)

    def test_clamped(self):
        assert two_step_rho(ModelCounts((1000, 0))) == 0.99
        assert two_step_rho(ModelCounts((0, 1000))) == 0.01

    def test_two_models_only(self):
        with pytest.raises(InputError):
            two_step_rho(ModelCounts((1, 2, 3)))


class TestJeffreysScale:
    def test_decisive_for_m0(self):
        assert jeffreys_category(2.5) is JeffreysCategory.M0_DECISIVE

    def test_weak_for_m1(self):
        assert jeffreys_category(-0.3) is JeffreysCategory.M1_WEAK

    def test_substantial_for_m0(self):
        assert jeffreys_category(0.7) is JeffreysCategory.M0_SUBSTANTIAL

    def test_boundaries_fall_to_weaker(self):
        assert jeffreys_category(0.0) is JeffreysCategory.M0_WEAK
        assert jeffreys_category(0.5) is JeffreysCategory.M0_WEAK
        assert jeffreys_category(1.0) is JeffreysCategory.M0_SUBSTANTIAL
        assert jeffreys_category(2.0) is JeffreysCategory.M0_STRONG
        assert jeffreys_category(-0.5) is JeffreysCategory.M1_WEAK
        assert jeffreys_category(-2.0) is JeffreysCategory.M1_STRONG

    def test_mirror_symmetry(self):
        for z in (0.1, 0.5, 0.8, 1.0, 1.7, 2.0, 2.9, 10.0):
            assert jeffreys_category(-z) is jeffreys_category(z).mirrored()

    def test_labels_round_trip(self):
        for cat in JeffreysCategory:
            assert JeffreysCategory.from_label(cat.label) is cat

    def test_category_attached_to_estimates(self):
        est = bf_smoothed(ModelCounts((999, 0)), EQUAL)
        assert est.jeffreys is JeffreysCategory.M0_DECISIVE
        est = bf_smoothed(ModelCounts((999, 0)), EQUAL, log_base=math.e)
        assert est.jeffreys is JeffreysCategory.M0_DECISIVE

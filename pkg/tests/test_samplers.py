"""Forward samplers: determinism, marginal correctness, Gibbs fidelity."""

import math

import numpy as np
import pytest
from scipy.stats import chi2

from gibbsabc.errors import InputError
from gibbsabc.grf import (
    BernoulliCount,
    IsingMatch,
    ModelSpec,
    SiteGraph,
    exact_distribution,
)
from gibbsabc.rng import RngStream, stream_keys
from gibbsabc.samplers import (
    ModelPrior,
    batch_bernoulli,
    batch_gibbs_ising,
    batch_markov,
    gibbs_sample_ising,
    sample_bernoulli_grf,
    sample_markov_grf,
    sample_model_index,
    sample_prior_theta,
)

M_BERN = ModelSpec(BernoulliCount(), -5, 5)


def _keys(seed, count):
    return stream_keys(seed, np.arange(count, dtype=np.uint64))


class TestModelPrior:
    def test_rejects_negative(self):
        with pytest.raises(InputError):
            ModelPrior((-0.1, 1.1))

    def test_rejects_bad_sum(self):
        with pytest.raises(InputError):
            ModelPrior((0.4, 0.4))

    def test_equal(self):
        assert ModelPrior.equal(4).weights == (0.25, 0.25, 0.25, 0.25)

    def test_odds(self):
        assert ModelPrior((0.25, 0.75)).odds() == pytest.approx(3.0)


class TestDeterminism:
    def test_same_stream_same_sequence(self):
        a = RngStream(123, 5).uniforms(64)
        b = RngStream(123, 5).uniforms(64)
        assert (a == b).all()

    def test_distinct_streams_differ(self):
        a = RngStream(123, 5).uniforms(64)
        b = RngStream(123, 6).uniforms(64)
        assert (a != b).any()

    def test_theta_draw_repeats(self):
        assert sample_prior_theta(M_BERN, RngStream(9, 1)) == sample_prior_theta(
            M_BERN, RngStream(9, 1)
        )

    def test_dataset_draw_repeats(self):
        a = sample_bernoulli_grf(1.0, 25, RngStream(4, 2))
        b = sample_bernoulli_grf(1.0, 25, RngStream(4, 2))
        assert a == b

    def test_scalar_matches_batch(self):
        # the scalar samplers must agree with the batch kernels the engine
        # uses, draw for draw
        for theta, n in ((0.3, 17), (-2.0, 5)):
            rng = RngStream(77, 3)
            scalar = sample_bernoulli_grf(theta, n, rng)
            batch = batch_bernoulli(np.asarray([theta]), n, _key_of(77, 3), 0)
            assert scalar.states == tuple(int(v) for v in batch[0])
        rng = RngStream(78, 4)
        scalar = sample_markov_grf(1.2, 12, rng)
        batch = batch_markov(np.asarray([1.2]), 12, _key_of(78, 4), 0)
        assert scalar.states == tuple(int(v) for v in batch[0])
        g = SiteGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
        rng = RngStream(79, 5)
        scalar = gibbs_sample_ising(g, 0.9, 7, rng)
        batch = batch_gibbs_ising(g, np.asarray([0.9]), 7, _key_of(79, 5), 0)
        assert scalar.states == tuple(int(v) for v in batch[0])


def _key_of(seed, stream_id):
    return stream_keys(seed, np.asarray([stream_id], dtype=np.uint64))


class TestPriorDraws:
    def test_theta_mean_symmetric_interval(self):
        # CLT bound frozen at 0.05: 3 * (10/sqrt(12)) / sqrt(1e5) = 0.027
        rng = RngStream(2, 0)
        draws = np.array([sample_prior_theta(M_BERN, rng) for _ in range(100_000)])
        assert abs(draws.mean()) < 0.05
        assert draws.min() >= -5 and draws.max() <= 5

    def test_model_index_degenerate(self):
        prior = ModelPrior((1.0, 0.0))
        assert all(sample_model_index(prior, RngStream(3, i)) == 0 for i in range(200))

    def test_model_index_fair(self):
        prior = ModelPrior((0.5, 0.5))
        rng = RngStream(5, 0)
        draws = np.searchsorted(prior.cumulative, rng.uniforms(100_000), side="right")
        freq0 = float((draws == 0).mean())
        assert abs(freq0 - 0.5) < 0.005

    def test_model_index_tilted(self):
        prior = ModelPrior((0.01, 0.99))
        rng = RngStream(6, 0)
        draws = np.searchsorted(prior.cumulative, rng.uniforms(100_000), side="right")
        freq1 = float((draws == 1).mean())
        assert abs(freq1 - 0.99) < 0.001  # 3 sigma = 9.4e-4


class TestBernoulliSampler:
    def test_fair_sites(self):
        n, reps = 100, 10_000
        bits = batch_bernoulli(np.zeros(reps), n, _keys(10, reps))
        mean_frac = bits.sum(axis=1).mean() / n
        assert abs(mean_frac - 0.5) < 0.015

    def test_strong_bias(self):
        p = 1 / (1 + math.exp(-5))  # 0.9933071490757153
        bits = batch_bernoulli(np.full(500, 5.0), 200, _keys(11, 500))
        freq = bits.mean()
        sigma = math.sqrt(p * (1 - p) / bits.size)
        assert abs(freq - p) < 3 * sigma

    def test_needs_one_site(self):
        with pytest.raises(InputError):
            sample_bernoulli_grf(0.0, 0, RngStream(1, 1))


class TestMarkovSampler:
    def test_fair_chain_persistence(self):
        n, reps = 60, 10_000
        bits = batch_markov(np.zeros(reps), n, _keys(12, reps))
        s1 = (bits[:, 1:] == bits[:, :-1]).sum(axis=1)
        expect = (n - 1) / 2
        sigma = math.sqrt((n - 1) * 0.25 / reps)
        assert abs(s1.mean() - expect) < 3 * sigma

    def test_sticky_chain(self):
        stay = 1 / (1 + math.exp(-6))  # 0.9975273768433653
        n, reps = 80, 2_000
        bits = batch_markov(np.full(reps, 6.0), n, _keys(13, reps))
        repeats = (bits[:, 1:] == bits[:, :-1]).mean()
        sigma = math.sqrt(stay * (1 - stay) / (reps * (n - 1)))
        assert abs(repeats - stay) < 3 * sigma

    def test_single_site(self):
        values = {sample_markov_grf(3.0, 1, RngStream(14, i)).states[0] for i in range(64)}
        assert values == {0, 1}


class TestGibbsSampler:
    def test_zero_coupling_single_sweep_uniform(self):
        # with theta = 0 every conditional is a fair coin, so one sweep
        # already yields the exact uniform law; chi-square GOF at alpha=.001
        g = SiteGraph.from_edges(3, [(0, 1), (1, 2)])
        reps = 10_000
        bits = batch_gibbs_ising(g, np.zeros(reps), 1, _keys(15, reps))
        codes = bits[:, 0] * 4 + bits[:, 1] * 2 + bits[:, 2]
        counts = np.bincount(codes, minlength=8)
        expected = reps / 8
        stat = ((counts - expected) ** 2 / expected).sum()
        assert stat < chi2.ppf(0.999, df=7)

    def test_isolated_vertices_iid_uniform(self):
        g = SiteGraph(6)
        reps = 5_000
        bits = batch_gibbs_ising(g, np.full(reps, 3.0), 2, _keys(16, reps))
        freq = bits.mean(axis=0)
        sigma = math.sqrt(0.25 / reps)
        assert (np.abs(freq - 0.5) < 4 * sigma).all()

    def test_needs_one_sweep(self):
        with pytest.raises(InputError):
            gibbs_sample_ising(SiteGraph(3), 1.0, 0, RngStream(1, 1))

    def test_four_cycle_tv_smoke(self):
        g = SiteGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
        m = ModelSpec(IsingMatch(g), 0, 4)
        reps = 20_000
        bits = batch_gibbs_ising(g, np.full(reps, 1.0), 60, _keys(17, reps))
        codes = bits @ (1 << np.arange(4))
        counts = np.bincount(codes, minlength=16)
        tv = 0.5 * np.abs(counts / reps - exact_distribution(m, 1.0)[_code_order(4)]).sum()
        assert tv < 0.03


def _code_order(n):
    # exact_distribution enumerates configurations by index whose bit i is
    # site i; codes above pack site i into bit i as well, so order matches
    return np.arange(1 << n)


class TestSmallScaleMarginals:
    """Empirical law within TV 0.01 of the enumerated law at 1e5 draws."""

    REPS = 100_000

    def _tv(self, bits, model, theta):
        n = bits.shape[1]
        codes = bits @ (1 << np.arange(n))
        counts = np.bincount(codes, minlength=1 << n)
        return 0.5 * np.abs(counts / len(bits) - exact_distribution(model, theta, n)).sum()

    def test_iid_sites(self):
        bits = batch_bernoulli(np.full(self.REPS, 1.3), 3, _keys(18, self.REPS))
        assert self._tv(bits, M_BERN, 1.3) < 0.01

    def test_chain(self):
        bits = batch_markov(np.full(self.REPS, 0.7), 3, _keys(19, self.REPS))
        # enumerated law of the chain: (1/2) e^(theta s1) / (1+e^theta)^(n-1)
        n = 3
        codes = bits @ (1 << np.arange(n))
        counts = np.bincount(codes, minlength=1 << n)
        probs = np.empty(1 << n)
        for code in range(1 << n):
            states = [(code >> i) & 1 for i in range(n)]
            s1 = sum(1 for i in range(1, n) if states[i] == states[i - 1])
            probs[code] = 0.5 * math.exp(0.7 * s1) / (1 + math.exp(0.7)) ** (n - 1)
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
        tv = 0.5 * np.abs(counts / self.REPS - probs).sum()
        assert tv < 0.01

    def test_gibbs_triangle(self):
        g = SiteGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
        m = ModelSpec(IsingMatch(g), 0, 4)
        bits = batch_gibbs_ising(g, np.full(self.REPS, 0.8), 60, _keys(20, self.REPS))
        assert self._tv(bits, m, 0.8) < 0.01

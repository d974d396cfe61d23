"""Likelihood-free Bayesian model choice for binary Gibbs random fields."""

__version__ = "0.1.0"

from .engine import AbcRun, Proposal, abc_mc_run, euclidean_distance, pilot_distances, select_epsilon
from .estimators import (
    BfEstimate,
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
from .grf import (
    BernoulliCount,
    Configuration,
    IsingMatch,
    MarkovPersistence,
    ModelSpec,
    SiteGraph,
    concat_stats,
)
from .rng import RngStream, derive_seed
from .samplers import (
    ModelPrior,
    gibbs_sample_ising,
    sample_bernoulli_grf,
    sample_markov_grf,
    sample_model_index,
    sample_prior_theta,
)
from .toy_oracle import exact_marginal_m0, exact_marginal_m1, exact_posterior_and_bf

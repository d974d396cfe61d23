"""Forward simulation of datasets and prior draws.

Every sampler is a pure function of its inputs and an RngStream, so a
fixed (seed, stream_id) reproduces the dataset exactly. The batch
kernels evaluate many streams at once (one stream per proposal) with the
same counter layout the scalar samplers consume, which is what makes
the rejection engine's output independent of batching and worker count:
proposal i simulated in a batch equals proposal i simulated alone.

Counter layout per stream: the engine spends counter 0 on the model
index and counter 1 on the parameter; a dataset then starts at
counter 2. Scalar samplers just consume from wherever the stream cursor
currently sits.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import expit

from .errors import InputError
from .grf import Configuration, SiteGraph
from .rng import RngStream, uniforms_at

_PRIOR_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class ModelPrior:
    """Probabilities over model indices; must sum to one."""

    weights: tuple[float, ...]

    def __post_init__(self):
        if not self.weights:
            raise InputError("model prior needs at least one weight")
        if any(w < 0 for w in self.weights):
            raise InputError("model prior weights must be non-negative")
        if abs(sum(self.weights) - 1.0) > _PRIOR_WEIGHT_TOL:
            raise InputError(f"model prior weights sum to {sum(self.weights)}, not 1")

    @classmethod
    def equal(cls, n_models: int) -> "ModelPrior":
        return cls(tuple(1.0 / n_models for _ in range(n_models)))

    @cached_property
    def cumulative(self) -> np.ndarray:
        c = np.cumsum(np.asarray(self.weights, dtype=np.float64))
        c[-1] = 1.0
        c.setflags(write=False)
        return c

    def odds(self, m1: int = 1, m0: int = 0) -> float:
        """pi(M=m1) / pi(M=m0)."""
        if self.weights[m0] == 0.0:
            raise InputError(f"model {m0} has zero prior mass; odds undefined")
        return self.weights[m1] / self.weights[m0]


def sample_model_index(prior: ModelPrior, rng: RngStream) -> int:
    """Draw a model index with the prior's weights."""
    return int(np.searchsorted(prior.cumulative, rng.uniform(), side="right"))


def sample_prior_theta(m, rng: RngStream) -> float:
    """Uniform draw from the model's prior interval."""
    return m.prior_low + rng.uniform() * (m.prior_high - m.prior_low)


def sample_bernoulli_grf(theta0: float, n: int, rng: RngStream) -> Configuration:
    """iid sites with P(x_i = 1) = logistic(theta0)."""
    if n < 1:
        raise InputError("need at least one site")
    bits = batch_bernoulli(np.asarray([theta0]), n, rng._key, rng.counter)
    rng._advance(n)
    return Configuration.from_array(bits[0])


def sample_markov_grf(theta1: float, n: int, rng: RngStream) -> Configuration:
    """Uniform first site, then stay-probability logistic(theta1)."""
    if n < 1:
        raise InputError("need at least one site")
    bits = batch_markov(np.asarray([theta1]), n, rng._key, rng.counter)
    rng._advance(n)
    return Configuration.from_array(bits[0])


def gibbs_sample_ising(g: SiteGraph, theta: float, sweeps: int, rng: RngStream) -> Configuration:
    """State after `sweeps` systematic single-site sweeps.

    The chain starts from a uniform random configuration drawn from the
    same stream; site i is refreshed from its conditional
    P(x_i = s | rest) proportional to exp(theta * #{neighbours with label s}).
    The draw is approximate for theta != 0 (finite sweeps), exact at
    theta = 0.
    """
    if sweeps < 1:
        raise InputError("need at least one sweep")
    bits = batch_gibbs_ising(g, np.asarray([theta]), sweeps, rng._key, rng.counter)
    rng._advance(g.n_sites * (sweeps + 1))
    return Configuration.from_array(bits[0])


# -- batch kernels (one row per stream) ----------------------------------

def batch_bernoulli(thetas: np.ndarray, n: int, keys: np.ndarray, base_counter: int = 2) -> np.ndarray:
    """Simulate len(keys) iid-site datasets; thetas aligned with keys."""
    p1 = expit(thetas)
    bits = np.empty((len(keys), n), dtype=np.uint8)
    for i in range(n):
        bits[:, i] = uniforms_at(keys, base_counter + i) < p1
    return bits


def batch_markov(thetas: np.ndarray, n: int, keys: np.ndarray, base_counter: int = 2) -> np.ndarray:
    """Simulate len(keys) persistence-chain datasets."""
    stay = expit(thetas)
    bits = np.empty((len(keys), n), dtype=np.uint8)
    bits[:, 0] = uniforms_at(keys, base_counter) < 0.5
    for i in range(1, n):
        u = uniforms_at(keys, base_counter + i)
        prev = bits[:, i - 1]
        bits[:, i] = np.where(u < stay, prev, 1 - prev)
    return bits


def batch_gibbs_ising(
    g: SiteGraph,
    thetas: np.ndarray,
    sweeps: int,
    keys: np.ndarray,
    base_counter: int = 2,
) -> np.ndarray:
    """Run len(keys) independent Gibbs chains for `sweeps` full sweeps."""
    n = g.n_sites
    nbrs = g.neighbours
    deg = np.asarray([len(a) for a in nbrs])
    bits = np.empty((len(keys), n), dtype=np.uint8)
    for i in range(n):
        bits[:, i] = uniforms_at(keys, base_counter + i) < 0.5
    c = base_counter + n
    for _ in range(sweeps):
        for i in range(n):
            u = uniforms_at(keys, c)
            c += 1
            if deg[i] == 0:
                bits[:, i] = u < 0.5
            else:
                n_ones = bits[:, nbrs[i]].sum(axis=1, dtype=np.int64)
                p1 = expit(thetas * (2.0 * n_ones - deg[i]))
                bits[:, i] = u < p1
    return bits

"""Rejection-based model-choice algorithms.

The central loop draws (model index, parameter, dataset) triples from
the sampling prior, reduces each dataset to its concatenated statistic
vector, and accepts proposals whose Euclidean distance to the observed
statistics clears the tolerance. Everything is evaluated in blocks of
proposal indices; proposal i always reads random stream (seed, i), so
results are bit-identical no matter how blocks are assigned to workers.

Tolerance semantics: acceptance is strict (distance < epsilon) for
epsilon > 0; epsilon = 0 means exact statistic match (distance == 0,
which is exact because statistics are integers); epsilon = inf accepts
everything and recovers the sampling prior.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InputError
from .grf import (
    BernoulliCount,
    Configuration,
    IsingMatch,
    MarkovPersistence,
    ModelSpec,
    StatVector,
    concat_stats,
)
from .rng import stream_keys, uniforms_at
from .samplers import (
    ModelPrior,
    batch_bernoulli,
    batch_gibbs_ising,
    batch_markov,
)

DEFAULT_BLOCK_SIZE = 32768
DEFAULT_GIBBS_SWEEPS = 1000


@dataclass(frozen=True)
class Proposal:
    """One accepted draw: where it came from and how close it landed."""

    index: int
    model_index: int
    theta: float
    stats: StatVector
    distance: float


@dataclass(frozen=True)
class AbcRun:
    """Output of one rejection run plus the configuration that made it."""

    observed_stats: StatVector
    epsilon: float
    proposals_total: int
    accepted: tuple[Proposal, ...]
    sampling_prior: ModelPrior
    target_prior: ModelPrior

    @property
    def n_models(self) -> int:
        return len(self.sampling_prior.weights)

    @property
    def acceptance_rate(self) -> float:
        if self.proposals_total == 0:
            return 0.0
        return len(self.accepted) / self.proposals_total

    def model_counts(self) -> tuple[int, ...]:
        counts = [0] * self.n_models
        for p in self.accepted:
            counts[p.model_index] += 1
        return tuple(counts)


@dataclass(frozen=True)
class ProposalBatch:
    """Raw per-proposal arrays for a whole run, in proposal-index order.

    Thresholding this once at several tolerances avoids re-simulating;
    `run_at` yields the same AbcRun that abc_mc_run would have produced.
    """

    observed_stats: StatVector
    model_index: np.ndarray
    theta: np.ndarray
    stats: np.ndarray
    distance: np.ndarray
    sampling_prior: ModelPrior

    def __len__(self) -> int:
        return len(self.model_index)

    @cached_property
    def sorted_distances(self) -> np.ndarray:
        return np.sort(self.distance)

    def accept_mask(self, epsilon: float) -> np.ndarray:
        if epsilon < 0:
            raise InputError("epsilon must be non-negative")
        if epsilon == 0.0:
            return self.distance == 0.0
        return self.distance < epsilon

    def run_at(self, epsilon: float, target_prior: ModelPrior) -> AbcRun:
        mask = self.accept_mask(epsilon)
        idx = np.nonzero(mask)[0]
        accepted = tuple(
            Proposal(
                index=int(i),
                model_index=int(self.model_index[i]),
                theta=float(self.theta[i]),
                stats=tuple(int(v) for v in self.stats[i]),
                distance=float(self.distance[i]),
            )
            for i in idx
        )
        return AbcRun(
            observed_stats=self.observed_stats,
            epsilon=epsilon,
            proposals_total=len(self),
            accepted=accepted,
            sampling_prior=self.sampling_prior,
            target_prior=target_prior,
        )


def euclidean_distance(a: StatVector, b: StatVector) -> float:
    """Root of the summed squared componentwise differences."""
    if len(a) != len(b):
        raise InputError(f"statistic vectors differ in length: {len(a)} vs {len(b)}")
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def _simulate_block(models, cumulative, x0_stats, n_sites, seed, start, stop, gibbs_sweeps):
    """Simulate proposals [start, stop); pure function of its arguments."""
    n_models = len(models)
    ids = np.arange(start, stop, dtype=np.uint64)
    keys = stream_keys(seed, ids)
    m_star = np.searchsorted(cumulative, uniforms_at(keys, 0), side="right").astype(np.int64)
    lows = np.asarray([m.prior_low for m in models])
    spans = np.asarray([m.prior_high - m.prior_low for m in models])
    theta = lows[m_star] + uniforms_at(keys, 1) * spans[m_star]

    stats = np.empty((len(ids), n_models), dtype=np.int64)
    for m in range(n_models):
        rows = np.nonzero(m_star == m)[0]
        if len(rows) == 0:
            continue
        bits = _simulate_datasets(models[m], theta[rows], n_sites, keys[rows], gibbs_sweeps)
        for j, spec in enumerate(models):
            stats[rows, j] = _batch_statistic(spec, bits)

    diffs = stats - np.asarray(x0_stats, dtype=np.int64)[None, :]
    dist = np.sqrt((diffs.astype(np.float64) ** 2).sum(axis=1))
    return m_star, theta, stats, dist


def _simulate_datasets(model, thetas, n_sites, keys, gibbs_sweeps):
    stat = model.statistic
    if isinstance(stat, BernoulliCount):
        return batch_bernoulli(thetas, n_sites, keys, base_counter=2)
    if isinstance(stat, MarkovPersistence):
        return batch_markov(thetas, n_sites, keys, base_counter=2)
    if isinstance(stat, IsingMatch):
        return batch_gibbs_ising(stat.graph, thetas, gibbs_sweeps, keys, base_counter=2)
    raise TypeError(f"unknown statistic {stat!r}")


def _batch_statistic(model, bits):
    stat = model.statistic
    if isinstance(stat, BernoulliCount):
        return bits.sum(axis=1, dtype=np.int64)
    if isinstance(stat, MarkovPersistence):
        if bits.shape[1] == 1:
            return np.zeros(len(bits), dtype=np.int64)
        return (bits[:, 1:] == bits[:, :-1]).sum(axis=1, dtype=np.int64)
    if isinstance(stat, IsingMatch):
        i, j = stat.graph.edge_arrays
        if len(i) == 0:
            return np.zeros(len(bits), dtype=np.int64)
        return (bits[:, i] == bits[:, j]).sum(axis=1, dtype=np.int64)
    raise TypeError(f"unknown statistic {stat!r}")


def run_proposals(
    models: list[ModelSpec],
    sampling_prior: ModelPrior,
    x0: Configuration,
    n_proposals: int,
    seed: int,
    *,
    gibbs_sweeps: int = DEFAULT_GIBBS_SWEEPS,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> ProposalBatch:
    """Draw and score n_proposals proposals; stream i belongs to proposal i."""
    if not models:
        raise InputError("need at least one model")
    if len(sampling_prior.weights) != len(models):
        raise InputError("model prior length does not match the model list")
    if n_proposals < 0:
        raise InputError("proposal count must be non-negative")
    x0_stats = concat_stats(x0, models)
    n_sites = len(x0)

    blocks = [(s, min(s + block_size, n_proposals)) for s in range(0, n_proposals, block_size)]
    cumulative = sampling_prior.cumulative

    def work(block):
        start, stop = block
        return _simulate_block(models, cumulative, x0_stats, n_sites, seed, start, stop, gibbs_sweeps)

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, blocks))
    else:
        results = [work(b) for b in blocks]

    if results:
        m_star = np.concatenate([r[0] for r in results])
        theta = np.concatenate([r[1] for r in results])
        stats = np.concatenate([r[2] for r in results])
        dist = np.concatenate([r[3] for r in results])
    else:
        m_star = np.empty(0, dtype=np.int64)
        theta = np.empty(0, dtype=np.float64)
        stats = np.empty((0, len(models)), dtype=np.int64)
        dist = np.empty(0, dtype=np.float64)

    return ProposalBatch(
        observed_stats=x0_stats,
        model_index=m_star,
        theta=theta,
        stats=stats,
        distance=dist,
        sampling_prior=sampling_prior,
    )


def abc_mc_run(
    models: list[ModelSpec],
    target_prior: ModelPrior,
    x0: Configuration,
    n_proposals: int,
    epsilon: float,
    seed: int,
    *,
    sampling_prior: ModelPrior | None = None,
    gibbs_sweeps: int = DEFAULT_GIBBS_SWEEPS,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> AbcRun:
    """Model-choice rejection run.

    Proposals are drawn under sampling_prior (defaults to target_prior;
    they differ only in the reweighted two-step scheme) and accepted
    when the statistic distance clears epsilon. Zero acceptances is a
    reported outcome, not an error.
    """
    if sampling_prior is None:
        sampling_prior = target_prior
    if len(target_prior.weights) != len(models):
        raise InputError("target prior length does not match the model list")
    batch = run_proposals(
        models,
        sampling_prior,
        x0,
        n_proposals,
        seed,
        gibbs_sweeps=gibbs_sweeps,
        workers=workers,
        block_size=block_size,
    )
    return batch.run_at(epsilon, target_prior)


def pilot_distances(
    models: list[ModelSpec],
    sampling_prior: ModelPrior,
    x0: Configuration,
    n_pilot: int,
    seed: int,
    *,
    gibbs_sweeps: int = DEFAULT_GIBBS_SWEEPS,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> np.ndarray:
    """Distances of n_pilot proposals drawn exactly as in abc_mc_run, sorted."""
    if n_pilot < 1:
        raise InputError("pilot needs at least one proposal")
    batch = run_proposals(
        models,
        sampling_prior,
        x0,
        n_pilot,
        seed,
        gibbs_sweeps=gibbs_sweeps,
        workers=workers,
        block_size=block_size,
    )
    return batch.sorted_distances


def select_epsilon(sorted_distances, q: float) -> float:
    """Nearest-rank quantile: element ceil(q*N)-1 of the ascending list."""
    n = len(sorted_distances)
    if n == 0:
        raise InputError("cannot take a quantile of an empty distance list")
    if not 0.0 < q <= 1.0:
        raise InputError(f"quantile fraction must be in (0, 1], got {q}")
    rank = math.ceil(q * n) - 1
    return float(sorted_distances[rank])


def exact_rejection(
    model: ModelSpec,
    x0: Configuration,
    n_proposals: int,
    seed: int,
    *,
    gibbs_sweeps: int = DEFAULT_GIBBS_SWEEPS,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> np.ndarray:
    """Single-model rejection on whole configurations: keep theta if x* == x0.

    Accepted draws are exact posterior samples. The parameter draw uses
    counter 0 and the dataset starts at counter 1 (there is no model-index
    draw here). Returns the accepted thetas in proposal order.
    """
    if n_proposals < 0:
        raise InputError("proposal count must be non-negative")
    n_sites = len(x0)
    need = model.statistic.n_sites_required()
    if need is not None and need != n_sites:
        raise InputError(f"model expects {need} sites, data has {n_sites}")
    target = x0.array
    kept: list[np.ndarray] = []
    for start in range(0, n_proposals, block_size):
        stop = min(start + block_size, n_proposals)
        ids = np.arange(start, stop, dtype=np.uint64)
        keys = stream_keys(seed, ids)
        theta = model.prior_low + uniforms_at(keys, 0) * (model.prior_high - model.prior_low)
        stat = model.statistic
        if isinstance(stat, BernoulliCount):
            bits = batch_bernoulli(theta, n_sites, keys, base_counter=1)
        elif isinstance(stat, MarkovPersistence):
            bits = batch_markov(theta, n_sites, keys, base_counter=1)
        elif isinstance(stat, IsingMatch):
            bits = batch_gibbs_ising(stat.graph, theta, gibbs_sweeps, keys, base_counter=1)
        else:
            raise TypeError(f"unknown statistic {stat!r}")
        hits = (bits == target[None, :]).all(axis=1)
        kept.append(theta[hits])
    if not kept:
        return np.empty(0, dtype=np.float64)
    return np.concatenate(kept)

"""Binary Gibbs random field models: types, statistics, and exact oracles.

A model is an exponential family over binary site configurations,
density proportional to exp(theta * S(x)) with an integer statistic S.
Three statistics cover everything in scope: the count of ones (iid
Bernoulli representation), the persistence count of a chain (number of
adjacent equal pairs), and the matching-neighbour count on an arbitrary
site graph (Ising). Normalising constants are never needed by the
simulation path; the brute-force and closed-form evaluators below exist
as oracles for small instances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Union

import numpy as np

from .errors import EnumerationLimitError, InputError

#: One integer statistic per candidate model, in model-index order.
StatVector = tuple[int, ...]

ENUMERATION_CAP = 20  # sites; 2^20 terms is the largest oracle sum we allow


@dataclass(frozen=True)
class Configuration:
    """A labelling of n sites, each 0 or 1. Immutable.

    Empty labellings are representable (an empty protein sequence maps
    to one); every operation that genuinely needs sites enforces its own
    minimum count.
    """

    states: tuple[int, ...]

    def __post_init__(self):
        if any(s not in (0, 1) for s in self.states):
            raise InputError("site labels must be 0 or 1")

    def __len__(self) -> int:
        return len(self.states)

    @cached_property
    def array(self) -> np.ndarray:
        a = np.asarray(self.states, dtype=np.uint8)
        a.setflags(write=False)
        return a

    @classmethod
    def from_array(cls, a) -> "Configuration":
        return cls(tuple(int(v) for v in a))


@dataclass(frozen=True)
class SiteGraph:
    """Undirected neighbourhood structure over n sites.

    Edges are canonical (min, max) pairs; an empty edge set is legal and
    gives the trivial neighbourhood.
    """

    n_sites: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n_sites < 1:
            raise InputError("a site graph needs at least one site")
        for i, j in self.edges:
            if i == j:
                raise InputError(f"self-loop at site {i}")
            if not (0 <= i < j < self.n_sites):
                raise InputError(f"edge ({i}, {j}) is not canonical or out of range")

    @classmethod
    def from_edges(cls, n_sites: int, pairs: Iterable[tuple[int, int]]) -> "SiteGraph":
        """Build from raw pairs, rejecting self-loops and duplicates."""
        seen: set[tuple[int, int]] = set()
        for a, b in pairs:
            if a == b:
                raise InputError(f"self-loop at site {a}")
            if not (0 <= a < n_sites and 0 <= b < n_sites):
                raise InputError(f"edge ({a}, {b}) references a site >= {n_sites}")
            e = (a, b) if a < b else (b, a)
            if e in seen:
                raise InputError(f"duplicate edge ({e[0]}, {e[1]})")
            seen.add(e)
        return cls(n_sites, frozenset(seen))

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge endpoints as two parallel index arrays (sorted, stable)."""
        es = sorted(self.edges)
        i = np.asarray([e[0] for e in es], dtype=np.intp)
        j = np.asarray([e[1] for e in es], dtype=np.intp)
        return i, j

    @cached_property
    def neighbours(self) -> tuple[np.ndarray, ...]:
        """Adjacency lists, one index array per site."""
        adj: list[list[int]] = [[] for _ in range(self.n_sites)]
        for i, j in sorted(self.edges):
            adj[i].append(j)
            adj[j].append(i)
        return tuple(np.asarray(a, dtype=np.intp) for a in adj)


@dataclass(frozen=True)
class BernoulliCount:
    """Statistic: number of sites labelled 1."""

    def n_sites_required(self) -> int | None:
        return None


@dataclass(frozen=True)
class MarkovPersistence:
    """Statistic: number of adjacent equal pairs along the chain."""

    def n_sites_required(self) -> int | None:
        return None


@dataclass(frozen=True)
class IsingMatch:
    """Statistic: number of graph edges whose endpoints agree."""

    graph: SiteGraph

    def n_sites_required(self) -> int | None:
        return self.graph.n_sites


Statistic = Union[BernoulliCount, MarkovPersistence, IsingMatch]


@dataclass(frozen=True)
class ModelSpec:
    """One candidate model: a statistic plus a uniform prior interval."""

    statistic: Statistic
    prior_low: float
    prior_high: float

    def __post_init__(self):
        if not self.prior_low < self.prior_high:
            raise InputError(
                f"prior interval must have positive width, got "
                f"[{self.prior_low}, {self.prior_high}]"
            )

    def stat_value(self, x: Configuration) -> int:
        return eval_statistic(self.statistic, x)


def suff_stat_bernoulli(x: Configuration) -> int:
    """Count of sites labelled 1, in [0, n]."""
    return int(x.array.sum())


def suff_stat_markov(x: Configuration) -> int:
    """Count of adjacent equal pairs, in [0, n-1]; 0 for a single site."""
    a = x.array
    if len(a) == 1:
        return 0
    return int((a[1:] == a[:-1]).sum())


def suff_stat_ising(x: Configuration, g: SiteGraph) -> int:
    """Count of edges whose endpoints carry equal labels."""
    if g.n_sites != len(x):
        raise InputError(
            f"configuration has {len(x)} sites but graph expects {g.n_sites}"
        )
    if not g.edges:
        return 0
    i, j = g.edge_arrays
    a = x.array
    return int((a[i] == a[j]).sum())


def eval_statistic(stat: Statistic, x: Configuration) -> int:
    if isinstance(stat, BernoulliCount):
        return suff_stat_bernoulli(x)
    if isinstance(stat, MarkovPersistence):
        return suff_stat_markov(x)
    if isinstance(stat, IsingMatch):
        return suff_stat_ising(x, stat.graph)
    raise TypeError(f"unknown statistic {stat!r}")


def concat_stats(x: Configuration, models: list[ModelSpec]) -> StatVector:
    """The concatenated statistic vector (S_0(x), ..., S_{M-1}(x)).

    All models must be defined on the site count of x; this vector is
    what the model-choice engine matches against.
    """
    if not models:
        raise InputError("need at least one model")
    for k, m in enumerate(models):
        need = m.statistic.n_sites_required()
        if need is not None and need != len(x):
            raise InputError(
                f"model {k} is defined on {need} sites but the "
                f"configuration has {len(x)}"
            )
    return tuple(m.stat_value(x) for m in models)


def log_unnorm_density(m: ModelSpec, theta: float, x: Configuration) -> float:
    """theta * S_m(x). The normalising constant is deliberately left out."""
    return theta * m.stat_value(x)


def _enumerate_stats(stat: Statistic, n: int) -> np.ndarray:
    """Statistic values over all 2^n configurations (enumeration oracle)."""
    if n > ENUMERATION_CAP:
        raise EnumerationLimitError(
            f"{n} sites exceeds the enumeration cap of {ENUMERATION_CAP}"
        )
    idx = np.arange(1 << n, dtype=np.uint32)
    bits = ((idx[:, None] >> np.arange(n, dtype=np.uint32)[None, :]) & 1).astype(np.uint8)
    if isinstance(stat, BernoulliCount):
        return bits.sum(axis=1).astype(np.int64)
    if isinstance(stat, MarkovPersistence):
        if n == 1:
            return np.zeros(2, dtype=np.int64)
        return (bits[:, 1:] == bits[:, :-1]).sum(axis=1).astype(np.int64)
    if isinstance(stat, IsingMatch):
        if stat.graph.n_sites != n:
            raise InputError("graph size does not match requested site count")
        i, j = stat.graph.edge_arrays
        if len(i) == 0:
            return np.zeros(1 << n, dtype=np.int64)
        return (bits[:, i] == bits[:, j]).sum(axis=1).astype(np.int64)
    raise TypeError(f"unknown statistic {stat!r}")


def brute_force_Z(m: ModelSpec, theta: float, n_sites: int | None = None) -> float:
    """Exact sum of exp(theta * S_m(x)) over all configurations.

    For Bernoulli/Markov statistics the site count must be given; the
    Ising statistic carries it in its graph. Summation runs through
    log-sum-exp so large theta*S does not overflow prematurely.
    """
    need = m.statistic.n_sites_required()
    if need is not None:
        n_sites = need
    if n_sites is None:
        raise InputError("site count required for this statistic")
    s = _enumerate_stats(m.statistic, n_sites)
    return float(np.exp(_logsumexp(theta * s)))


def log_brute_force_Z(m: ModelSpec, theta: float, n_sites: int | None = None) -> float:
    need = m.statistic.n_sites_required()
    if need is not None:
        n_sites = need
    if n_sites is None:
        raise InputError("site count required for this statistic")
    s = _enumerate_stats(m.statistic, n_sites)
    return float(_logsumexp(theta * s))


def exact_distribution(m: ModelSpec, theta: float, n_sites: int | None = None) -> np.ndarray:
    """Exact probabilities of all 2^n configurations (enumeration oracle)."""
    need = m.statistic.n_sites_required()
    if need is not None:
        n_sites = need
    if n_sites is None:
        raise InputError("site count required for this statistic")
    logw = theta * _enumerate_stats(m.statistic, n_sites)
    logw = logw - _logsumexp(logw)
    return np.exp(logw)


def _logsumexp(v: np.ndarray) -> float:
    hi = float(np.max(v))
    return hi + float(np.log(np.exp(v - hi).sum()))


def closed_form_Z(model_kind: str, theta: float, n: int) -> float:
    """Closed-form normalising constants for the two chain-free oracles.

    'bernoulli': (1 + e^theta)^n.
    'markov':    2 (1 + e^theta)^(n-1), the uniform initial state
                 contributing the factor 2.
    """
    return float(np.exp(log_closed_form_Z(model_kind, theta, n)))


def log_closed_form_Z(model_kind: str, theta: float, n: int) -> float:
    if n < 1:
        raise InputError("need at least one site")
    log1pe = float(np.logaddexp(0.0, theta))
    if model_kind == "bernoulli":
        return n * log1pe
    if model_kind == "markov":
        return float(np.log(2.0)) + (n - 1) * log1pe
    raise InputError(f"no closed form for model kind {model_kind!r}")

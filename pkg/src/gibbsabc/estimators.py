"""Posterior-probability and Bayes-factor estimators from rejection output.

All estimators work on the accepted model-index counts alone. The
smoothed (count+1) ratio is the workhorse: it is always defined, equals
the ratio of Dirichlet(1,...,1) posterior means, and has a closed-form
conditional bias that vanishes as the accepted sample grows. The
reweighted variant corrects counts obtained under a tilted
model-sampling distribution back to the equal-prior Bayes factor.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import EstimatorUndefinedError, InputError, NoAcceptanceError
from .samplers import ModelPrior

RHO_CLAMP = (0.01, 0.99)


@dataclass(frozen=True)
class ModelCounts:
    """Accepted-proposal counts per model index."""

    counts: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise InputError("counts must be non-negative")

    @property
    def total(self) -> int:
        return sum(self.counts)

    @classmethod
    def from_run(cls, run) -> "ModelCounts":
        return cls(run.model_counts())


class JeffreysCategory(enum.Enum):
    """Strength-of-evidence bins for a log Bayes factor, both directions.

    Axis order matches increasing log BF(m0/m1): decisive evidence for
    m1 up through decisive evidence for m0. Boundary values fall to the
    weaker bin; log BF = 0 counts as weak support for m0.
    """

    M1_DECISIVE = 0
    M1_STRONG = 1
    M1_SUBSTANTIAL = 2
    M1_WEAK = 3
    M0_WEAK = 4
    M0_SUBSTANTIAL = 5
    M0_STRONG = 6
    M0_DECISIVE = 7

    @property
    def label(self) -> str:
        side, strength = self.name.split("_")
        return f"{strength.lower()}:{side.lower()}"

    @classmethod
    def from_label(cls, label: str) -> "JeffreysCategory":
        strength, side = label.split(":")
        return cls[f"{side.upper()}_{strength.upper()}"]

    def mirrored(self) -> "JeffreysCategory":
        return JeffreysCategory(7 - self.value)


def jeffreys_category(log_bf: float) -> JeffreysCategory:
    """Bin a log Bayes factor (base chosen by the caller; 10 by default
    elsewhere) on the eight-category evidence scale."""
    favours_m0 = log_bf >= 0
    z = abs(log_bf)
    if z > 2:
        strength = "DECISIVE"
    elif z > 1:
        strength = "STRONG"
    elif z > 0.5:
        strength = "SUBSTANTIAL"
    else:
        strength = "WEAK"
    side = "M0" if favours_m0 else "M1"
    return JeffreysCategory[f"{side}_{strength}"]


@dataclass(frozen=True)
class BfEstimate:
    """A Bayes-factor value for models (m0, m1) = (0, 1), with provenance."""

    value: float
    kind: str  # plugin | smoothed | reweighted
    prior_odds_used: float  # pi(M=1)/pi(M=0), or rho/(1-rho) for reweighted
    counts: ModelCounts
    jeffreys: JeffreysCategory

    @property
    def log10(self) -> float:
        return math.log10(self.value)


def posterior_prob_hat(counts: ModelCounts, m: int) -> float:
    """Empirical frequency of model m among accepted proposals."""
    if counts.total == 0:
        raise NoAcceptanceError("no acceptances; posterior frequencies undefined")
    return counts.counts[m] / counts.total


def _categorise(value: float, log_base: float) -> JeffreysCategory:
    return jeffreys_category(math.log(value) / math.log(log_base))


def bf_plugin(counts: ModelCounts, target_prior: ModelPrior, *, log_base: float = 10.0) -> BfEstimate:
    """(N0/N1) times the target prior odds; undefined when N1 = 0."""
    n0, n1 = counts.counts[0], counts.counts[1]
    if n1 == 0:
        raise EstimatorUndefinedError(
            "plug-in Bayes factor undefined with zero model-1 acceptances; "
            "use the smoothed estimator"
        )
    odds = target_prior.odds(1, 0)
    value = (n0 / n1) * odds
    if value == 0.0:
        # N0 = 0: report the exact zero but classify as decisively m1
        return BfEstimate(value, "plugin", odds, counts, JeffreysCategory.M1_DECISIVE)
    return BfEstimate(value, "plugin", odds, counts, _categorise(value, log_base))


def bf_smoothed(counts: ModelCounts, target_prior: ModelPrior, *, log_base: float = 10.0) -> BfEstimate:
    """(1+N0)/(1+N1) times the target prior odds.

    Defined for every count vector (a run with no acceptances returns
    the prior odds); equals the ratio of posterior means of the model
    probabilities under a flat Dirichlet.
    """
    n0, n1 = counts.counts[0], counts.counts[1]
    odds = target_prior.odds(1, 0)
    value = ((1 + n0) / (1 + n1)) * odds
    return BfEstimate(value, "smoothed", odds, counts, _categorise(value, log_base))


def bf_reweighted(counts: ModelCounts, rho: float, *, log_base: float = 10.0) -> BfEstimate:
    """Correct counts sampled with model-1 mass rho back to equal priors.

    (1+N0)/(1+N1) * rho/(1-rho); estimates the equal-prior Bayes factor.
    """
    if not 0.0 < rho < 1.0:
        raise InputError(f"rho must be inside (0, 1), got {rho}")
    n0, n1 = counts.counts[0], counts.counts[1]
    odds = rho / (1.0 - rho)
    value = ((1 + n0) / (1 + n1)) * odds
    return BfEstimate(value, "reweighted", odds, counts, _categorise(value, log_base))


def bf_bias(p: float, n: int) -> float:
    """Conditional bias of the smoothed ratio around BF = (1-p)/p.

    Given N = n accepted proposals and per-acceptance model-1
    probability p, E[(N0+1)/(N1+1) | N] - BF equals
    {1 - (n+2)(1-p)^(n+1)} / ((n+1) p); it vanishes as n grows.
    """
    if not 0.0 < p <= 1.0:
        raise InputError(f"p must be in (0, 1], got {p}")
    if n < 0:
        raise InputError("n must be non-negative")
    return (1.0 - (n + 2) * (1.0 - p) ** (n + 1)) / ((n + 1) * p)


def two_step_rho(first_run_counts: ModelCounts) -> float:
    """Model-1 sampling mass for the reweighted second run.

    Inverse-probability tilting with +1-smoothed frequencies, so a
    first run that never visited a model still yields a usable rho:
    rho = (N0+1)/(N+2), clamped to keep both models visited.
    """
    if len(first_run_counts.counts) != 2:
        raise InputError("the two-step scheme is defined for exactly two models")
    n0, n1 = first_run_counts.counts
    rho = (n0 + 1) / (n0 + n1 + 2)
    lo, hi = RHO_CLAMP
    return min(max(rho, lo), hi)

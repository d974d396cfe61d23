"""The iid-vs-chain validation study: simulate, estimate, compare to exact.

For every dataset (parameters drawn from the priors, half the datasets
from each model) the driver records the exact posterior and Bayes
factor next to the rejection estimates at two tolerances: exact
statistic match (epsilon = 0) and the configured distance quantile.
Summary artifacts are the two category-confusion matrices, the
quartiles of estimated/exact Bayes-factor ratios, and per-dataset
acceptance counts.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig
from .engine import ProposalBatch, run_proposals, select_epsilon
from .estimators import (
    JeffreysCategory,
    ModelCounts,
    bf_plugin,
    bf_smoothed,
    jeffreys_category,
    posterior_prob_hat,
)
from .errors import EstimatorUndefinedError, NoAcceptanceError
from .grf import BernoulliCount, MarkovPersistence, ModelSpec, suff_stat_bernoulli, suff_stat_markov
from .reports import emit_csv, summary_text, write_text
from .rng import RngStream, derive_seed
from .samplers import ModelPrior, sample_bernoulli_grf, sample_markov_grf, sample_prior_theta
from .toy_oracle import exact_posterior_and_bf

RESULT_COLUMNS = [
    "dataset_id",
    "true_model",
    "theta_true",
    "n_sites",
    "s0",
    "s1",
    "exact_p0",
    "exact_bf",
    "exact_log_bf",
    "exact_jeffreys",
    "eps0_accepted",
    "eps0_n0",
    "eps0_n1",
    "eps0_p0_hat",
    "eps0_bf_plugin",
    "eps0_bf_smoothed",
    "eps0_ratio",
    "eps0_jeffreys",
    "epsq_epsilon",
    "epsq_accepted",
    "epsq_n0",
    "epsq_n1",
    "epsq_p0_hat",
    "epsq_bf_plugin",
    "epsq_bf_smoothed",
    "epsq_ratio",
    "epsq_jeffreys",
]

SCHEMA_NOTES = """\
results.csv: one row per simulated dataset.
  dataset_id      m<model>-<index>, the generating model and replicate number
  true_model      model index the dataset was simulated from (0 iid, 1 chain)
  theta_true      parameter drawn from that model's prior
  n_sites         sequence length
  s0, s1          observed statistics (ones count, persistence count)
  exact_p0        exact posterior probability of model 0 (equal model prior)
  exact_bf        exact Bayes factor BF(0/1)
  exact_log_bf    its log in the configured base
  exact_jeffreys  evidence category of the exact Bayes factor
  eps0_*          estimates at exact statistic match (epsilon = 0)
  epsq_*          estimates at the configured distance quantile
  *_accepted      accepted proposal count
  *_n0, *_n1      accepted counts per model
  *_p0_hat        accepted frequency of model 0 (empty when nothing accepted)
  *_bf_plugin     count-ratio estimate (empty when undefined, i.e. n1 = 0)
  *_bf_smoothed   (n0+1)/(n1+1) estimate (always defined)
  *_ratio         bf_smoothed / exact_bf
  *_jeffreys      evidence category of bf_smoothed
  epsq_epsilon    the tolerance actually used for the quantile columns

confusion_eps0.csv / confusion_epsq.csv: 8x8 category counts,
rows = exact category, columns = estimated (smoothed) category.

ratio_quantiles.csv: quartiles of bf_smoothed / exact_bf per tolerance.

acceptance_counts.csv: accepted proposals per dataset and tolerance.
"""

_CATEGORY_ORDER = list(JeffreysCategory)


def toy_model_pair() -> list[ModelSpec]:
    """The two toy candidates: iid sites on U(-5,5), chain on U(0,6)."""
    return [ModelSpec(BernoulliCount(), -5.0, 5.0), ModelSpec(MarkovPersistence(), 0.0, 6.0)]


@dataclass(frozen=True)
class ToleranceEstimates:
    epsilon: float
    accepted: int
    n0: int
    n1: int
    p0_hat: float | None
    bf_plugin_value: float | None
    bf_smoothed_value: float
    ratio: float
    jeffreys: JeffreysCategory


@dataclass(frozen=True)
class ToyRow:
    dataset_id: str
    true_model: int
    theta_true: float
    n_sites: int
    s0: int
    s1: int
    exact_p0: float
    exact_bf: float
    exact_log_bf: float
    exact_jeffreys: JeffreysCategory
    eps0: ToleranceEstimates
    epsq: ToleranceEstimates

    def cells(self) -> list:
        return [
            self.dataset_id,
            self.true_model,
            self.theta_true,
            self.n_sites,
            self.s0,
            self.s1,
            self.exact_p0,
            self.exact_bf,
            self.exact_log_bf,
            self.exact_jeffreys.label,
            self.eps0.accepted,
            self.eps0.n0,
            self.eps0.n1,
            self.eps0.p0_hat,
            self.eps0.bf_plugin_value,
            self.eps0.bf_smoothed_value,
            self.eps0.ratio,
            self.eps0.jeffreys.label,
            self.epsq.epsilon,
            self.epsq.accepted,
            self.epsq.n0,
            self.epsq.n1,
            self.epsq.p0_hat,
            self.epsq.bf_plugin_value,
            self.epsq.bf_smoothed_value,
            self.epsq.ratio,
            self.epsq.jeffreys.label,
        ]


@dataclass(frozen=True)
class ToyStudyResult:
    rows: tuple[ToyRow, ...]
    config: RunConfig

    def ratios(self, which: str) -> np.ndarray:
        return np.asarray([getattr(r, which).ratio for r in self.rows])

    def median_ratio(self, which: str) -> float:
        return float(np.median(self.ratios(which)))

    def ratio_quartiles(self, which: str) -> tuple[float, float, float]:
        q = np.quantile(self.ratios(which), [0.25, 0.5, 0.75])
        return float(q[0]), float(q[1]), float(q[2])

    def confusion_matrix(self, which: str) -> np.ndarray:
        m = np.zeros((8, 8), dtype=np.int64)
        for r in self.rows:
            m[r.exact_jeffreys.value, getattr(r, which).jeffreys.value] += 1
        return m

    def within_one_category_fraction(self, which: str) -> float:
        hits = sum(
            1
            for r in self.rows
            if abs(r.exact_jeffreys.value - getattr(r, which).jeffreys.value) <= 1
        )
        return hits / len(self.rows)

    def write(self, out_dir: Path) -> list[Path]:
        out_dir = Path(out_dir)
        paths = []

        def put(name: str, text: str) -> None:
            p = out_dir / name
            write_text(p, text)
            paths.append(p)

        put("results.csv", emit_csv(RESULT_COLUMNS, [r.cells() for r in self.rows]))
        labels = [c.label for c in _CATEGORY_ORDER]
        for which, name in (("eps0", "confusion_eps0.csv"), ("epsq", "confusion_epsq.csv")):
            m = self.confusion_matrix(which)
            rows = [[labels[i]] + [int(v) for v in m[i]] for i in range(8)]
            put(name, emit_csv(["exact\\estimated"] + labels, rows))
        qrows = []
        for which, label in (("eps0", "exact-match"), ("epsq", "quantile")):
            q25, q50, q75 = self.ratio_quartiles(which)
            qrows.append([label, q25, q50, q75])
        put("ratio_quantiles.csv", emit_csv(["tolerance", "q25", "q50", "q75"], qrows))
        put(
            "acceptance_counts.csv",
            emit_csv(
                ["dataset_id", "eps0_accepted", "epsq_accepted"],
                [[r.dataset_id, r.eps0.accepted, r.epsq.accepted] for r in self.rows],
            ),
        )
        body = [
            ("datasets_total", str(len(self.rows))),
            ("median_ratio_eps0", repr(self.median_ratio("eps0"))),
            ("median_ratio_epsq", repr(self.median_ratio("epsq"))),
            ("within_one_category_eps0", repr(self.within_one_category_fraction("eps0"))),
            ("within_one_category_epsq", repr(self.within_one_category_fraction("epsq"))),
            (
                "mean_accepted_eps0",
                repr(float(np.mean([r.eps0.accepted for r in self.rows]))),
            ),
            (
                "mean_accepted_epsq",
                repr(float(np.mean([r.epsq.accepted for r in self.rows]))),
            ),
        ]
        put("summary.txt", summary_text("toy-experiment", self.config.describe(), body))
        put("schema.txt", SCHEMA_NOTES)
        return paths


def _estimate_at(
    batch: ProposalBatch,
    epsilon: float,
    prior: ModelPrior,
    exact_bf: float,
    log_base: float,
) -> ToleranceEstimates:
    run = batch.run_at(epsilon, prior)
    counts = ModelCounts.from_run(run)
    try:
        p0_hat = posterior_prob_hat(counts, 0)
    except NoAcceptanceError:
        p0_hat = None
    try:
        plugin = bf_plugin(counts, prior, log_base=log_base).value
    except EstimatorUndefinedError:
        plugin = None
    smoothed = bf_smoothed(counts, prior, log_base=log_base)
    return ToleranceEstimates(
        epsilon=epsilon,
        accepted=counts.total,
        n0=counts.counts[0],
        n1=counts.counts[1],
        p0_hat=p0_hat,
        bf_plugin_value=plugin,
        bf_smoothed_value=smoothed.value,
        ratio=smoothed.value / exact_bf,
        jeffreys=smoothed.jeffreys,
    )


def run_toy_experiment(config: RunConfig, n_datasets: int, n_sites: int) -> ToyStudyResult:
    """n_datasets per model, one result row per dataset."""
    models = toy_model_pair()
    prior = ModelPrior.equal(2)
    rows: list[ToyRow] = []
    for true_model in (0, 1):
        for j in range(n_datasets):
            rng = RngStream(derive_seed(config.seed, "toy-data", true_model, j))
            theta_true = sample_prior_theta(models[true_model], rng)
            if true_model == 0:
                x0 = sample_bernoulli_grf(theta_true, n_sites, rng)
            else:
                x0 = sample_markov_grf(theta_true, n_sites, rng)
            with warnings.catch_warnings():
                # constant sequences occur legitimately under extreme thetas
                warnings.simplefilter("ignore", UserWarning)
                exact_p0, _exact_p1, exact_bf = exact_posterior_and_bf(x0, prior)
            exact_log_bf = math.log(exact_bf) / math.log(config.log_base)

            batch = run_proposals(
                models,
                prior,
                x0,
                config.n_proposals,
                derive_seed(config.seed, "toy-estimate", true_model, j),
                workers=config.workers,
            )
            if config.epsilon_from_run:
                eps_q = select_epsilon(batch.sorted_distances, config.quantile_q)
            else:
                pilot = run_proposals(
                    models,
                    prior,
                    x0,
                    config.pilot_size,
                    derive_seed(config.seed, "toy-pilot", true_model, j),
                    workers=config.workers,
                )
                eps_q = select_epsilon(pilot.sorted_distances, config.quantile_q)

            rows.append(
                ToyRow(
                    dataset_id=f"m{true_model}-{j:04d}",
                    true_model=true_model,
                    theta_true=theta_true,
                    n_sites=n_sites,
                    s0=suff_stat_bernoulli(x0),
                    s1=suff_stat_markov(x0),
                    exact_p0=exact_p0,
                    exact_bf=exact_bf,
                    exact_log_bf=exact_log_bf,
                    exact_jeffreys=jeffreys_category(exact_log_bf),
                    eps0=_estimate_at(batch, 0.0, prior, exact_bf, config.log_base),
                    epsq=_estimate_at(batch, eps_q, prior, exact_bf, config.log_base),
                )
            )
    return ToyStudyResult(rows=tuple(rows), config=config)

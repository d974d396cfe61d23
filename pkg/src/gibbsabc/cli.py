"""Command-line front end.

Verbs: toy-experiment (validation study against the exact oracle),
abc-run (generic model-choice run on user files), protein-select
(structure ranking), pilot-epsilon (tolerance selection only).

Exit codes: 0 success, 2 invalid input, 3 runtime/IO failure. All result
files and stdout are byte-deterministic in (config, inputs, seed);
progress chatter goes to stderr.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .config import (
    OUT_DIR_ENV,
    RunConfig,
    load_config_file,
    parse_epsilon_spec,
    parse_log_base,
    resolve_config,
)
from .engine import abc_mc_run, pilot_distances, select_epsilon
from .errors import EstimatorUndefinedError, InputError, NoAcceptanceError
from .estimators import (
    ModelCounts,
    bf_plugin,
    bf_reweighted,
    bf_smoothed,
    posterior_prob_hat,
    two_step_rho,
)
from .grf import BernoulliCount, Configuration, IsingMatch, MarkovPersistence, ModelSpec
from .protein import CandidateStructure, load_contact_graph, load_sequence, run_structure_selection
from .reports import emit_csv, format_cell, summary_text, write_text
from .rng import derive_seed
from .samplers import ModelPrior
from .toy_study import run_toy_experiment

DEFAULT_OUT = Path("gibbsabc-out")


def load_model_file(path: str | Path) -> ModelSpec:
    """Parse a model file: statistic kind, prior bounds, optional graph."""
    path = Path(path)
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    kind = fields.get("statistic")
    if kind not in ("bernoulli", "markov", "ising"):
        raise InputError(f"{path}: statistic must be bernoulli, markov or ising")
    try:
        low = float(fields["prior_low"])
        high = float(fields["prior_high"])
    except KeyError as missing:
        raise InputError(f"{path}: missing {missing.args[0]}")
    except ValueError:
        raise InputError(f"{path}: prior bounds must be numbers")
    if kind == "bernoulli":
        stat = BernoulliCount()
    elif kind == "markov":
        stat = MarkovPersistence()
    else:
        if "graph" not in fields:
            raise InputError(f"{path}: ising models need a graph = <path> entry")
        stat = IsingMatch(load_contact_graph(path.parent / fields["graph"]))
    return ModelSpec(stat, low, high)


def load_data_file(path: str | Path) -> Configuration:
    """Parse a configuration file: one line of 0/1 labels."""
    text = Path(path).read_text().strip()
    labels = []
    for ch in text.replace(",", " ").split() or [text]:
        for c in ch:
            if c not in "01":
                raise InputError(f"{path}: site labels must be 0 or 1, got {c!r}")
            labels.append(int(c))
    if not labels:
        raise InputError(f"{path}: empty data file")
    return Configuration(tuple(labels))


def _config_from_args(args) -> RunConfig:
    file_overrides = load_config_file(args.config) if args.config else {}
    flags: dict = {}
    if args.seed is not None:
        flags["seed"] = args.seed
    if args.proposals is not None:
        flags["n_proposals"] = args.proposals
    if args.epsilon is not None:
        flags.update(parse_epsilon_spec(args.epsilon))
    if args.pilot is not None:
        flags["pilot_size"] = args.pilot
    if args.sweeps is not None:
        flags["gibbs_sweeps"] = args.sweeps
    if args.workers is not None:
        flags["workers"] = args.workers
    if args.log_base is not None:
        flags["log_base"] = parse_log_base(args.log_base)
    if args.out is not None:
        flags["out_dir"] = Path(args.out)
    if getattr(args, "two_step", False):
        flags["two_step"] = True
    if getattr(args, "epsilon_from_run", False):
        flags["epsilon_from_run"] = True
    if getattr(args, "datasets", None) is not None:
        flags["datasets"] = args.datasets
    if getattr(args, "sites", None) is not None:
        flags["sites"] = args.sites
    return resolve_config(file_overrides, flags)


def _out_dir(config: RunConfig) -> Path:
    return config.out_dir if config.out_dir is not None else DEFAULT_OUT


def _resolve_epsilon(config: RunConfig, models, prior, x0, seed_label: str):
    """Tolerance per the configured mode; quantile mode runs a pilot."""
    if config.epsilon_mode == "exact-zero":
        return 0.0, None
    if config.epsilon_mode == "infinite":
        return float("inf"), None
    if config.epsilon_mode == "fixed":
        return config.epsilon_value, None
    distances = pilot_distances(
        models,
        prior,
        x0,
        config.pilot_size,
        derive_seed(config.seed, seed_label, "pilot"),
        gibbs_sweeps=config.gibbs_sweeps,
        workers=config.workers,
    )
    return select_epsilon(distances, config.quantile_q), distances


def _run_report(run, config: RunConfig, prior: ModelPrior) -> list[tuple[str, str]]:
    counts = ModelCounts.from_run(run)
    pairs = [
        ("epsilon_used", format_cell(run.epsilon)),
        ("proposals", str(run.proposals_total)),
        ("accepted", str(counts.total)),
        ("acceptance_rate", format_cell(run.acceptance_rate)),
        ("counts", " ".join(str(c) for c in counts.counts)),
    ]
    for m in range(run.n_models):
        try:
            pairs.append((f"posterior_hat_m{m}", format_cell(posterior_prob_hat(counts, m))))
        except NoAcceptanceError:
            pairs.append((f"posterior_hat_m{m}", "undefined (no acceptances)"))
    if run.n_models >= 2:
        try:
            plugin = bf_plugin(counts, prior, log_base=config.log_base)
            pairs.append(("bf_plugin_0_over_1", format_cell(plugin.value)))
            pairs.append(("bf_plugin_jeffreys", plugin.jeffreys.label))
        except EstimatorUndefinedError:
            pairs.append(("bf_plugin_0_over_1", "undefined (no model-1 acceptances)"))
        smoothed = bf_smoothed(counts, prior, log_base=config.log_base)
        pairs.append(("bf_smoothed_0_over_1", format_cell(smoothed.value)))
        pairs.append(("bf_smoothed_jeffreys", smoothed.jeffreys.label))
    return pairs


def cmd_toy_experiment(args) -> int:
    config = _config_from_args(args)
    if config.epsilon_mode != "quantile":
        raise InputError("toy-experiment compares epsilon = 0 against a quantile "
                         "tolerance; use --epsilon q:<frac>")
    print(
        f"toy-experiment: {config.datasets} datasets per model, "
        f"{config.sites} sites, {config.n_proposals} proposals each",
        file=sys.stderr,
    )
    result = run_toy_experiment(config, config.datasets, config.sites)
    out = _out_dir(config)
    paths = result.write(out)
    for p in paths:
        print(p.as_posix())
    return 0


def cmd_abc_run(args) -> int:
    config = _config_from_args(args)
    models = [load_model_file(p) for p in args.model]
    x0 = load_data_file(args.data)
    prior = ModelPrior.equal(len(models))
    if config.two_step and len(models) != 2:
        raise InputError("--two-step needs exactly two models")

    epsilon, _ = _resolve_epsilon(config, models, prior, x0, "abc-run")
    run = abc_mc_run(
        models,
        prior,
        x0,
        config.n_proposals,
        epsilon,
        derive_seed(config.seed, "abc-run", "estimate"),
        gibbs_sweeps=config.gibbs_sweeps,
        workers=config.workers,
    )
    body = _run_report(run, config, prior)

    if config.two_step:
        counts1 = ModelCounts.from_run(run)
        rho = two_step_rho(counts1)
        tilted = ModelPrior((1.0 - rho, rho))
        eps2, _ = _resolve_epsilon(config, models, tilted, x0, "abc-run-second")
        second = abc_mc_run(
            models,
            prior,
            x0,
            config.n_proposals,
            eps2,
            derive_seed(config.seed, "abc-run", "second"),
            sampling_prior=tilted,
            gibbs_sweeps=config.gibbs_sweeps,
            workers=config.workers,
        )
        counts2 = ModelCounts.from_run(second)
        rew = bf_reweighted(counts2, rho, log_base=config.log_base)
        body += [
            ("two_step_rho", format_cell(rho)),
            ("second_epsilon_used", format_cell(second.epsilon)),
            ("second_accepted", str(len(second.accepted))),
            ("second_counts", " ".join(str(c) for c in counts2.counts)),
            ("bf_reweighted_0_over_1", format_cell(rew.value)),
            ("bf_reweighted_jeffreys", rew.jeffreys.label),
        ]

    text = summary_text("abc-run", config.describe(), body)
    print(text, end="")
    if config.out_dir is not None:
        write_text(config.out_dir / "abc_run_summary.txt", text)
    return 0


def cmd_protein_select(args) -> int:
    config = _config_from_args(args)
    seq = load_sequence(args.sequence)
    candidates = []
    for spec in args.graph:
        if "=" in spec:
            name, _, path = spec.partition("=")
        else:
            name, path = Path(spec).stem, spec
        candidates.append(CandidateStructure(name=name, graph=load_contact_graph(path)))
    print(
        f"protein-select: {len(candidates)} candidates, reference {args.reference!r}",
        file=sys.stderr,
    )
    results = run_structure_selection(seq, candidates, args.reference, config)

    header = ["candidate", "bf_ref_over_candidate", "log_bf", "jeffreys", "epsilon", "accepted", "n_ref", "n_candidate"]
    rows = []
    for r in results:
        log_bf = math.log(r.estimate.value) / math.log(config.log_base)
        rows.append([
            r.candidate,
            r.estimate.value,
            log_bf,
            r.estimate.jeffreys.label,
            r.epsilon,
            r.accepted,
            r.counts.counts[0],
            r.counts.counts[1],
        ])
    csv_text = emit_csv(header, rows)

    widths = [max(len(format_cell(row[i])) for row in rows + [header]) for i in range(len(header))]
    print(f"reference: {args.reference}")
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in rows:
        print("  ".join(format_cell(v).ljust(w) for v, w in zip(row, widths)))

    if config.out_dir is not None:
        write_text(config.out_dir / "protein_select.csv", csv_text)
        body = [("reference", args.reference), ("pairs", str(len(rows)))]
        write_text(
            config.out_dir / "protein_select_summary.txt",
            summary_text("protein-select", config.describe(), body),
        )
    return 0


def cmd_pilot_epsilon(args) -> int:
    config = _config_from_args(args)
    models = [load_model_file(p) for p in args.model]
    x0 = load_data_file(args.data)
    prior = ModelPrior.equal(len(models))
    distances = pilot_distances(
        models,
        prior,
        x0,
        config.pilot_size,
        derive_seed(config.seed, "pilot-epsilon"),
        gibbs_sweeps=config.gibbs_sweeps,
        workers=config.workers,
    )
    eps = select_epsilon(distances, config.quantile_q)
    print(f"pilot_size = {len(distances)}")
    print(f"quantile = {format_cell(config.quantile_q)}")
    print(f"epsilon = {format_cell(eps)}")
    print(f"min_distance = {format_cell(float(distances[0]))}")
    print(f"max_distance = {format_cell(float(distances[-1]))}")
    if config.out_dir is not None:
        write_text(
            config.out_dir / "pilot_distances.csv",
            emit_csv(["rank", "distance"], [[i, float(d)] for i, d in enumerate(distances)]),
        )
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file; flags override it")
    parser.add_argument("--seed", type=int, help="master seed (default 1)")
    parser.add_argument("--proposals", type=int, help="proposal budget per run")
    parser.add_argument("--epsilon", help="tolerance: 0 | inf | q:<frac> | v:<value>")
    parser.add_argument("--pilot", type=int, help="pilot size for quantile tolerances")
    parser.add_argument("--sweeps", type=int, help="Gibbs sweeps per simulated dataset")
    parser.add_argument("--workers", type=int, help="worker threads (results identical)")
    parser.add_argument("--log-base", dest="log_base", help="Jeffreys log base: 10 or e")
    parser.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or {DEFAULT_OUT})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gibbsabc",
        description="Likelihood-free Bayesian model choice for binary Gibbs random fields",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("toy-experiment", help="validation study against the exact toy oracle")
    _add_common(p)
    p.add_argument("--datasets", type=int, help="datasets per model (default 200)")
    p.add_argument("--sites", type=int, help="sites per dataset (default 50)")
    p.add_argument(
        "--epsilon-from-run",
        dest="epsilon_from_run",
        action="store_true",
        help="take the quantile from the estimation run itself instead of a pilot",
    )
    p.set_defaults(func=cmd_toy_experiment)

    p = sub.add_parser("abc-run", help="model-choice run on user-supplied model/data files")
    _add_common(p)
    p.add_argument("--model", action="append", required=True, help="model file (repeatable)")
    p.add_argument("--data", required=True, help="observed configuration file")
    p.add_argument("--two-step", dest="two_step", action="store_true",
                   help="reweighted second run with rho from the first run")
    p.set_defaults(func=cmd_abc_run)

    p = sub.add_parser("protein-select", help="rank candidate structures for a query sequence")
    _add_common(p)
    p.add_argument("--sequence", required=True, help="query sequence file (one-letter codes)")
    p.add_argument("--graph", action="append", required=True,
                   help="candidate contact graph, NAME=PATH or PATH (repeatable)")
    p.add_argument("--reference", required=True, help="name of the reference candidate")
    p.set_defaults(func=cmd_protein_select)

    p = sub.add_parser("pilot-epsilon", help="pilot distances and the quantile tolerance")
    _add_common(p)
    p.add_argument("--model", action="append", required=True, help="model file (repeatable)")
    p.add_argument("--data", required=True, help="observed configuration file")
    p.set_defaults(func=cmd_pilot_epsilon)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

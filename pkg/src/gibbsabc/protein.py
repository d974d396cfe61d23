"""Structure ranking for a query protein via Ising models on contact graphs.

Each candidate 3D structure is reduced to a contact graph (one node per
residue, one edge per spatially close pair, built upstream of this
package); the residue sequence becomes a binary configuration through a
two-class hydrophobicity labelling. An Ising model per graph then lets
the rejection engine estimate pairwise Bayes factors between a
designated reference structure and every alternative.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .config import RunConfig
from .engine import abc_mc_run, pilot_distances, select_epsilon
from .errors import GraphFormatError, InputError
from .estimators import BfEstimate, ModelCounts, bf_smoothed
from .grf import Configuration, IsingMatch, ModelSpec, SiteGraph
from .rng import derive_seed
from .samplers import ModelPrior

# Two-class split of the twenty amino acids by hydrophobicity.
HYDROPHILIC = "KERDQNPHSTG"
HYDROPHOBIC = "AYMWFVLIC"
AMINO_ACIDS = frozenset(HYDROPHILIC + HYDROPHOBIC)

# Scalar-parameter prior interval used for every structure model.
STRUCTURE_PRIOR = (0.0, 4.0)


@dataclass(frozen=True)
class AminoSequence:
    """A protein sequence in one-letter codes."""

    residues: str

    def __post_init__(self):
        for pos, ch in enumerate(self.residues):
            if ch not in AMINO_ACIDS:
                raise InputError(
                    f"invalid residue {ch!r} at position {pos} "
                    f"(expected one of {''.join(sorted(AMINO_ACIDS))})"
                )

    def __len__(self) -> int:
        return len(self.residues)


@dataclass(frozen=True)
class CandidateStructure:
    """A named contact graph over the query's residue positions."""

    name: str
    graph: SiteGraph


@dataclass(frozen=True)
class PairResult:
    """Bayes-factor estimate for one reference-vs-candidate pair."""

    reference: str
    candidate: str
    epsilon: float
    proposals: int
    accepted: int
    counts: ModelCounts
    estimate: BfEstimate


def hydrophobicity_labels(seq: AminoSequence) -> Configuration:
    """0 for hydrophilic residues, 1 for hydrophobic ones.

    The encoding choice is inconsequential for inference because the
    matching-neighbour statistic is invariant under a global label flip.
    """
    return Configuration(tuple(0 if ch in HYDROPHILIC else 1 for ch in seq.residues))


def load_sequence(path: str | Path) -> AminoSequence:
    """Read a sequence file: a single line of one-letter codes."""
    text = Path(path).read_text().strip()
    if "\n" in text:
        raise InputError(f"{path}: expected a single-line sequence file")
    return AminoSequence(text)


def load_contact_graph(path: str | Path) -> SiteGraph:
    """Parse an edge-list file into a validated SiteGraph.

    Line 1 is the site count; every following non-empty line holds two
    0-based site indices. '#' starts a comment. Errors carry the
    offending line number.
    """
    lines = Path(path).read_text().splitlines()
    n_sites = None
    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n_sites is None:
            try:
                n_sites = int(line)
            except ValueError:
                raise GraphFormatError(f"expected the site count, got {line!r}", lineno)
            if n_sites < 1:
                raise GraphFormatError(f"site count must be positive, got {n_sites}", lineno)
            continue
        fields = line.split()
        if len(fields) != 2:
            raise GraphFormatError(f"expected two site indices, got {line!r}", lineno)
        try:
            a, b = int(fields[0]), int(fields[1])
        except ValueError:
            raise GraphFormatError(f"non-integer site index in {line!r}", lineno)
        if a == b:
            raise GraphFormatError(f"self-loop at site {a}", lineno)
        if not (0 <= a < n_sites and 0 <= b < n_sites):
            raise GraphFormatError(
                f"edge ({a}, {b}) references a site outside 0..{n_sites - 1}", lineno
            )
        e = (a, b) if a < b else (b, a)
        if e in seen:
            raise GraphFormatError(f"duplicate edge ({e[0]}, {e[1]})", lineno)
        seen.add(e)
        pairs.append(e)
    if n_sites is None:
        raise GraphFormatError(f"{path}: empty graph file")
    return SiteGraph.from_edges(n_sites, pairs)


def _run_pair(
    x0: Configuration,
    reference: CandidateStructure,
    candidate: CandidateStructure,
    config: RunConfig,
) -> PairResult:
    """One reference-vs-candidate rejection run; model 0 is the reference."""
    lo, hi = STRUCTURE_PRIOR
    models = [
        ModelSpec(IsingMatch(reference.graph), lo, hi),
        ModelSpec(IsingMatch(candidate.graph), lo, hi),
    ]
    prior = ModelPrior.equal(2)
    pair_seed = derive_seed(config.seed, "pair", reference.name, candidate.name)
    epsilon = config.epsilon_value
    if config.epsilon_mode == "quantile":
        pilot = pilot_distances(
            models,
            prior,
            x0,
            config.pilot_size,
            derive_seed(pair_seed, "pilot"),
            gibbs_sweeps=config.gibbs_sweeps,
        )
        epsilon = select_epsilon(pilot, config.quantile_q)
    elif config.epsilon_mode == "exact-zero":
        epsilon = 0.0
    elif config.epsilon_mode == "infinite":
        epsilon = float("inf")
    run = abc_mc_run(
        models,
        prior,
        x0,
        config.n_proposals,
        epsilon,
        derive_seed(pair_seed, "estimate"),
        gibbs_sweeps=config.gibbs_sweeps,
    )
    counts = ModelCounts.from_run(run)
    estimate = bf_smoothed(counts, prior, log_base=config.log_base)
    return PairResult(
        reference=reference.name,
        candidate=candidate.name,
        epsilon=epsilon,
        proposals=run.proposals_total,
        accepted=len(run.accepted),
        counts=counts,
        estimate=estimate,
    )


def run_structure_selection(
    seq: AminoSequence,
    candidates: list[CandidateStructure],
    reference_name: str,
    config: RunConfig,
) -> list[PairResult]:
    """Estimate BF(reference / candidate) for every non-reference candidate.

    Pairs run independently (and concurrently when config.workers > 1)
    with seeds derived from the run seed and the pair names, so results
    do not depend on candidate order or scheduling. Rows come back
    sorted by Bayes factor, largest first.
    """
    if len(candidates) < 2:
        raise InputError("structure selection needs at least two candidates")
    names = [c.name for c in candidates]
    if len(set(names)) != len(names):
        raise InputError("candidate names must be unique")
    by_name = {c.name: c for c in candidates}
    if reference_name not in by_name:
        raise InputError(
            f"reference {reference_name!r} is not among the candidates {names}"
        )
    n = len(seq)
    for c in candidates:
        if c.graph.n_sites != n:
            raise InputError(
                f"candidate {c.name!r} has {c.graph.n_sites} sites "
                f"but the sequence has {n} residues"
            )
    reference = by_name[reference_name]
    x0 = hydrophobicity_labels(seq)
    others = [c for c in candidates if c.name != reference_name]

    def work(candidate: CandidateStructure) -> PairResult:
        return _run_pair(x0, reference, candidate, config)

    if config.workers > 1 and len(others) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(work, others))
    else:
        results = [work(c) for c in others]
    return sorted(results, key=lambda r: (-r.estimate.value, r.candidate))

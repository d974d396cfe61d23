"""Contact-graph ingestion, hydrophobicity labelling, structure ranking."""

import numpy as np
import pytest

from gibbsabc.config import RunConfig
from gibbsabc.errors import GraphFormatError, InputError
from gibbsabc.grf import Configuration, SiteGraph, suff_stat_ising
from gibbsabc.protein import (
    AMINO_ACIDS,
    HYDROPHILIC,
    HYDROPHOBIC,
    AminoSequence,
    CandidateStructure,
    hydrophobicity_labels,
    load_contact_graph,
    load_sequence,
    run_structure_selection,
)


def _random_graph(seed: int, n: int, n_edges: int) -> SiteGraph:
    rng = np.random.default_rng(seed)
    edges = set()
    while len(edges) < n_edges:
        a, b = (int(v) for v in rng.integers(0, n, 2))
        if a != b:
            edges.add((min(a, b), max(a, b)))
    return SiteGraph.from_edges(n, sorted(edges))


def _random_sequence(seed: int, n: int) -> AminoSequence:
    rng = np.random.default_rng(seed)
    letters = sorted(AMINO_ACIDS)
    return AminoSequence("".join(letters[int(i)] for i in rng.integers(0, 20, n)))


class TestHydrophobicityLabels:
    def test_examples(self):
        assert hydrophobicity_labels(AminoSequence("KAC")).states == (0, 1, 1)
        assert hydrophobicity_labels(AminoSequence("")).states == ()
        assert hydrophobicity_labels(AminoSequence("GW")).states == (0, 1)

    def test_partition_counts(self):
        assert len(HYDROPHILIC) == 11
        assert len(HYDROPHOBIC) == 9
        assert len(AMINO_ACIDS) == 20
        labels = hydrophobicity_labels(AminoSequence(HYDROPHILIC + HYDROPHOBIC))
        assert sum(labels.states) == 9

    def test_invalid_residue_reports_position(self):
        with pytest.raises(InputError, match="position 2"):
            AminoSequence("KAXC")

    def test_encoding_choice_is_flip_invariant(self):
        # 0 = hydrophilic is arbitrary: the matching-neighbour statistic
        # cannot tell the two encodings apart
        seq = _random_sequence(3, 25)
        g = _random_graph(4, 25, 40)
        labels = hydrophobicity_labels(seq)
        flipped = Configuration(tuple(1 - s for s in labels.states))
        assert suff_stat_ising(labels, g) == suff_stat_ising(flipped, g)


class TestLoadContactGraph:
    def test_path_graph(self, tmp_path):
        p = tmp_path / "g.edges"
        p.write_text("3\n0 1\n1 2\n")
        g = load_contact_graph(p)
        assert g.n_sites == 3
        assert g.edges == frozenset({(0, 1), (1, 2)})

    def test_comments_and_blanks(self, tmp_path):
        p = tmp_path / "g.edges"
        p.write_text("# a path\n3\n\n0 1  # first contact\n1 2\n")
        assert load_contact_graph(p).edges == frozenset({(0, 1), (1, 2)})

    def test_self_loop_line_number(self, tmp_path):
        p = tmp_path / "g.edges"
        p.write_text("2\n0 0\n")
        with pytest.raises(GraphFormatError, match="line 2"):
            load_contact_graph(p)

    def test_duplicate_edge(self, tmp_path):
        p = tmp_path / "g.edges"
        p.write_text("2\n0 1\n0 1\n")
        with pytest.raises(GraphFormatError, match="duplicate"):
            load_contact_graph(p)

    def test_duplicate_edge_reversed(self, tmp_path):
        p = tmp_path / "g.edges"
        p.write_text("3\n0 1\n1 0\n")
        with pytest.raises(GraphFormatError, match="line 3"):
            load_contact_graph(p)

    def test_out_of_range(self, tmp_path):
        p = tmp_path / "g.edges"
        p.write_text("3\n0 3\n")
        with pytest.raises(GraphFormatError, match="line 2"):
            load_contact_graph(p)

    def test_malformed_line(self, tmp_path):
        p = tmp_path / "g.edges"
        p.write_text("3\n0 1 2\n")
        with pytest.raises(GraphFormatError, match="line 2"):
            load_contact_graph(p)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "g.edges"
        p.write_text("# nothing\n")
        with pytest.raises(GraphFormatError):
            load_contact_graph(p)


class TestLoadSequence:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "q.seq"
        p.write_text("KACGW\n")
        assert load_sequence(p).residues == "KACGW"

    def test_multiline_rejected(self, tmp_path):
        p = tmp_path / "q.seq"
        p.write_text("KAC\nGW\n")
        with pytest.raises(InputError):
            load_sequence(p)


def _selection_config(**overrides) -> RunConfig:
    base = dict(
        seed=91,
        n_proposals=20_000,
        pilot_size=2_000,
        gibbs_sweeps=20,
        quantile_q=0.01,
    )
    base.update(overrides)
    return RunConfig(**base).validate()


class TestStructureSelection:
    N = 16

    def test_identical_graphs_near_unit_bf(self):
        # same graph twice: the statistics coincide on every dataset, so
        # accepted model labels are fair coin flips; at ~200 acceptances
        # 3 sigma on log10 BF is 0.19, so [0.5, 2] is a lenient envelope
        seq = _random_sequence(7, self.N)
        g = _random_graph(8, self.N, 24)
        candidates = [CandidateStructure("ref", g), CandidateStructure("twin", g)]
        results = run_structure_selection(seq, candidates, "ref", _selection_config())
        assert len(results) == 1
        assert 0.5 < results[0].estimate.value < 2.0

    def test_identical_graphs_distance_zero_componentwise(self):
        seq = _random_sequence(7, self.N)
        g = _random_graph(8, self.N, 24)
        candidates = [CandidateStructure("ref", g), CandidateStructure("twin", g)]
        r = run_structure_selection(seq, candidates, "ref", _selection_config())[0]
        assert r.counts.total == r.accepted

    def test_candidate_order_invariance(self):
        seq = _random_sequence(9, self.N)
        ga, gb, gc = (_random_graph(s, self.N, 22) for s in (10, 11, 12))
        cands = [
            CandidateStructure("alpha", ga),
            CandidateStructure("beta", gb),
            CandidateStructure("gamma", gc),
        ]
        cfg = _selection_config()
        first = run_structure_selection(seq, cands, "alpha", cfg)
        second = run_structure_selection(seq, list(reversed(cands)), "alpha", cfg)
        assert first == second

    def test_worker_count_invariance(self):
        seq = _random_sequence(9, self.N)
        ga, gb, gc = (_random_graph(s, self.N, 22) for s in (10, 11, 12))
        cands = [
            CandidateStructure("alpha", ga),
            CandidateStructure("beta", gb),
            CandidateStructure("gamma", gc),
        ]
        serial = run_structure_selection(seq, cands, "alpha", _selection_config(workers=1))
        parallel = run_structure_selection(seq, cands, "alpha", _selection_config(workers=3))
        assert serial == parallel

    def test_swapped_roles_roughly_reciprocal(self):
        # independent runs both directions; at ~400 acceptances each the
        # 3 sigma band for log10 of the product is about +-0.09
        seq = _random_sequence(13, self.N)
        ga = _random_graph(14, self.N, 22)
        gb = _random_graph(15, self.N, 22)
        cfg = _selection_config(n_proposals=40_000, pilot_size=4_000)
        cands = [CandidateStructure("a", ga), CandidateStructure("b", gb)]
        fwd = run_structure_selection(seq, cands, "a", cfg)[0]
        rev = run_structure_selection(seq, cands, "b", cfg)[0]
        product = fwd.estimate.value * rev.estimate.value
        assert 0.55 < product < 1.8

    def test_needs_two_candidates(self):
        seq = _random_sequence(1, self.N)
        with pytest.raises(InputError):
            run_structure_selection(
                seq, [CandidateStructure("only", _random_graph(2, self.N, 10))], "only", _selection_config()
            )

    def test_unknown_reference(self):
        seq = _random_sequence(1, self.N)
        cands = [
            CandidateStructure("a", _random_graph(2, self.N, 10)),
            CandidateStructure("b", _random_graph(3, self.N, 10)),
        ]
        with pytest.raises(InputError):
            run_structure_selection(seq, cands, "missing", _selection_config())

    def test_graph_size_mismatch(self):
        seq = _random_sequence(1, self.N)
        cands = [
            CandidateStructure("a", _random_graph(2, self.N, 10)),
            CandidateStructure("b", _random_graph(3, self.N + 1, 10)),
        ]
        with pytest.raises(InputError):
            run_structure_selection(seq, cands, "a", _selection_config())

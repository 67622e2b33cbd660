import pytest

from sti.derivation import Rule, ax, iter_nodes, weaken
from sti.measures import degree, measure_report, proof_size, rank, weight
from sti.terms import term_size

from conftest import a


class TestExample:
    def test_proof_size(self, example):
        # nodes: left spine 5 (Ax, Ax, →E, m, →I), each Σi 4, (∧2) 1, root 1
        assert [proof_size(d) for d in example] == [15, 9, 4]

    def test_rank_and_degree(self, example):
        assert [rank(d) for d in example] == [2, 2, 2]
        assert [degree(d) for d in example] == [1, 1, 0]

    def test_weights(self, example):
        assert [weight(d, 2) for d in example] == [13, 7, 3]
        assert [weight(d, 1) for d in example] == [9, 6, 3]

    def test_report_json(self, example):
        rep = measure_report(example[0], [1, 2, 3])
        assert rep.to_json() == {"proof_size": 15, "subject_size": 9, "rank": 2, "degree": 1,
                                 "weights": {"1": 9, "2": 13, "3": 17}}


def test_identity(identity):
    assert (proof_size(identity), rank(identity), degree(identity)) == (2, 1, 0)
    assert weight(identity, 5) == 2


def test_rank_counts_only_live_merged_variables():
    from sti.derivation import mux
    d = mux(weaken(weaken(ax("y", a), "x1", a), "x2", a), ["x1", "x2"], "x")
    assert rank(d) == 1


def test_weight_parameter_must_be_positive(identity):
    with pytest.raises(ValueError):
        weight(identity, 0)


def test_lemma3m_and_monotonicity_on_corpus(corpus):
    for m, d, _ in corpus:
        size = term_size(m)
        assert rank(d) <= size <= proof_size(d)
        assert weight(d, 1) == size
        dg = degree(d)
        ws = [weight(d, r) for r in range(1, 9)]
        assert all(w <= r ** dg * ws[0] for r, w in zip(range(1, 9), ws))
        assert ws == sorted(ws)


def test_structural_rules_carry_no_weight(corpus):
    for _, d, _ in corpus[:100]:
        for _, node in iter_nodes(d):
            if node.rule in (Rule.WEAKEN, Rule.MUX):
                assert all(weight(node, r) == weight(node.premises[0], r) for r in (1, 2, 3))
            if node.rule is Rule.AND:
                assert weight(node, 1) <= max(weight(p, 1) for p in node.premises)

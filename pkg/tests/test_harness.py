import json

import pytest

from sti.derivation import ax
from sti.harness import (check_lemma3m, check_weight_monotonicity, format_remark_table,
                         gen_sn_terms, intersection_tree_violations, remark_family_report,
                         remark_term, run_corpus, simply_typable, verify_bounds)
from sti.inference import infer
from sti.terms import FuelExhausted, Lam, Var, format_term, normalize, parse_term, term_size

from conftest import a, example_first

EXAMPLE = r"(\x. x x) ((\y. y) z)"


class TestGeneration:
    def test_smallest(self):
        assert gen_sn_terms(0, 1, 2) == [Lam("x", Var("x"))]

    def test_deterministic(self):
        assert gen_sn_terms(5, 40, 10) == gen_sn_terms(5, 40, 10)
        assert [format_term(t) for t in gen_sn_terms(5, 40, 10)] == \
            [format_term(t) for t in gen_sn_terms(5, 40, 10)]

    def test_seed_matters(self):
        assert gen_sn_terms(1, 30, 10) != gen_sn_terms(2, 30, 10)

    def test_properties(self):
        terms = gen_sn_terms(42, 500, 12)
        assert len(terms) == 500
        assert len({t.key for t in terms}) == 500
        for t in terms:
            assert term_size(t) <= 12
            assert simply_typable(t)
            assert normalize(t, "lo")[-1] == normalize(t, "ri")[-1]

    def test_simple_types(self):
        assert simply_typable(parse_term(r"\f x. f (f x)"))
        assert not simply_typable(parse_term(r"\x. x x"))
        assert not simply_typable(parse_term(r"(\x. x x) (\x. x x)"))


class TestBounds:
    def test_example(self):
        rep = verify_bounds(parse_term(EXAMPLE), example_first())
        assert (rep.subject_size, rep.degree, rep.theorem_bound) == (9, 1, 81)
        assert rep.longest_reduction == 3
        assert rep.weight_ceiling == 13
        assert rep.ok

    def test_identity(self):
        m = parse_term(r"\x. x")
        rep = verify_bounds(m, infer(m))
        assert (rep.theorem_bound, rep.longest_reduction) == (2, 0)
        assert rep.ok

    def test_remark_two(self):
        m = remark_term(2)
        rep = verify_bounds(m, infer(m))
        assert rep.theorem_bound == term_size(m) ** (rep.degree + 1)
        assert rep.ok

    def test_json(self):
        doc = verify_bounds(parse_term(EXAMPLE), example_first()).to_json()
        json.dumps(doc)
        assert doc["ok"] and doc["term"] == "(λx. x x) ((λy. y) z)"

    def test_subject_mismatch(self):
        with pytest.raises(ValueError):
            verify_bounds(parse_term("z"), example_first())


class TestLemma3m:
    def test_example(self):
        assert all(check_lemma3m(example_first(), range(1, 5)).values())

    def test_axiom(self):
        assert all(check_lemma3m(ax("x", a)).values())


class TestMonotonicity:
    def test_example(self):
        rep = check_weight_monotonicity(example_first())
        assert rep.ok and rep.edges > 0 and not rep.violations
        assert rep.derivations == 6

    def test_normal_form_is_vacuous(self):
        rep = check_weight_monotonicity(ax("x", a))
        assert rep.ok and rep.edges == 0

    def test_fuel(self):
        with pytest.raises(FuelExhausted):
            check_weight_monotonicity(example_first(), fuel=2)


class TestRemark:
    def test_terms(self):
        assert format_term(remark_term(3)) == "(λx. λy. y x x x) ((λz. z) (λz. z))"
        with pytest.raises(ValueError):
            remark_term(0)

    def test_report(self):
        rows = remark_family_report(4)
        assert [r.n for r in rows] == [1, 2, 3, 4]
        assert all(r.ok for r in rows)
        assert [r.subject_size for r in rows] == [2 * n + 9 for n in range(1, 5)]
        assert [r.claimed_size for r in rows] == [8, 10, 12, 14]
        assert [(r.degree, r.rank) for r in rows] == [(0, 1), (1, 2), (1, 3), (1, 4)]
        table = format_remark_table(rows)
        assert len(table.splitlines()) == 6 and "informational" in table


def test_corpus_pipeline_small():
    rep = run_corpus(seed=3, count=40, max_size=9, substitution_pairs_count=30)
    assert rep.ok, rep.summary()
    assert rep.summary()["terms"] == 40
    json.dumps(rep.to_json())


def test_tree_property_on_example():
    assert intersection_tree_violations(example_first()) == []

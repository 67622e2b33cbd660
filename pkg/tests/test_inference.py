import pytest
from hypothesis import given, settings

from sti.derivation import alpha_equivalent, check_derivation
from sti.harness import remark_term, simply_typable
from sti.inference import (BoundsExhausted, SearchBounds, infer, infer_minimal_depth,
                           infer_with_context, search)
from sti.itypes import Arrow, Inter, parse_type, type_equal
from sti.measures import degree, proof_size, rank
from sti.terms import parse_term

from conftest import A, a, example_first
from strategies import closed_terms

EXAMPLE = r"(\x. x x) ((\y. y) z)"


def test_identity():
    d, deg = infer_minimal_depth(parse_term(r"\x. x"))
    assert str(d.conclusion) == "⊢ λx. x: a -> a"
    assert deg == 0 and degree(d) == 0 and rank(d) == 1


def test_self_application_type():
    d = infer(parse_term(r"\x. x x"))
    assert type_equal(d.type, Arrow(Inter((A, a)), a))
    assert type_equal(d.type, parse_type("((a -> a) ∧ a) -> a"))


def test_example_degree_and_context():
    d, deg = infer_minimal_depth(parse_term(EXAMPLE))
    assert deg == 1 and degree(d) == 1
    assert d.type == a
    assert d.ctx["z"] == Inter((A, a))
    assert proof_size(d) == 15


def test_example_with_given_context_matches_hand_derivation():
    d = infer_with_context(parse_term(EXAMPLE), {"z": parse_type("(a ∧ (a -> a))")})
    assert alpha_equivalent(d, example_first())


def test_given_context_with_unused_variable():
    d = infer_with_context(parse_term(r"\x. x"), {"w": parse_type("(a ∧ a)")})
    assert check_derivation(d).ok and d.ctx["w"] == Inter((a, a))


def test_given_context_must_cover_free_variables():
    with pytest.raises(BoundsExhausted):
        infer_with_context(parse_term("x y"), {"x": A})


def test_degree_zero_is_exhausted_for_example():
    with pytest.raises(BoundsExhausted):
        infer(parse_term(EXAMPLE), SearchBounds(max_degree=0))


def test_remark_term_two():
    d, deg = infer_minimal_depth(remark_term(2))
    assert (deg, rank(d)) == (1, 2)


def test_free_variable_occurrences_are_merged():
    d = infer(parse_term("x x"))
    assert str(d.conclusion) == "x: ((a -> a) ∧ a) ⊢ x x: a"


def test_omega_exhausts_bounds():
    with pytest.raises(BoundsExhausted) as exc:
        infer(parse_term(r"(\x. x x) (\x. x x)"))
    assert "untypable" not in str(exc.value)
    assert exc.value.stats.nodes_expanded > 0


def test_triple_omega_exhausts_bounds():
    with pytest.raises(BoundsExhausted):
        infer(parse_term(r"(\x. x x x) (\x. x x x)"), SearchBounds(time_fuel=200_000))


def test_fuel_bound():
    with pytest.raises(BoundsExhausted):
        infer(parse_term(EXAMPLE), SearchBounds(time_fuel=3))


def test_proof_size_bound():
    with pytest.raises(BoundsExhausted):
        infer(parse_term(EXAMPLE), SearchBounds(max_proof_size=14))


def test_type_element_bound():
    with pytest.raises(BoundsExhausted):
        infer(parse_term(r"\x. x x x"), SearchBounds(max_type_elements=2))


@pytest.mark.parametrize("kwargs", [dict(max_degree=-1), dict(time_fuel=0),
                                    dict(max_type_elements=0), dict(max_proof_size=0)])
def test_bounds_validated(kwargs):
    with pytest.raises(ValueError):
        SearchBounds(**kwargs)


def test_deterministic():
    m = parse_term(r"(\f x. f (f x)) (\y. y)")
    assert alpha_equivalent(infer(m), infer(m))


def test_soundness_on_corpus(corpus):
    for m, d, deg in corpus:
        assert check_derivation(d).ok
        assert d.term == m
        assert not d.ctx
        assert degree(d) == deg


def test_lower_degree_fails_on_corpus(corpus):
    for m, _, deg in corpus:
        if deg > 0:
            with pytest.raises(BoundsExhausted):
                search(m, SearchBounds(max_degree=deg - 1))


@settings(max_examples=60, deadline=None)
@given(closed_terms(max_leaves=7))
def test_simply_typable_terms_are_inferred(m):
    if not simply_typable(m):
        return
    d, deg, _ = search(m)
    assert check_derivation(d).ok and d.term == m and degree(d) == deg

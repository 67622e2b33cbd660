"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Runtime limits are asserted alongside the functional checks.
"""

import random
import time

import pytest

from sti.derivation import alpha_equivalent, check_derivation
from sti.harness import (check_lemma3m, check_weight_monotonicity, check_weighted_substitution,
                         gen_sn_terms, intersection_tree_violations, remark_family_report,
                         substitution_pairs, verify_bounds)
from sti.inference import BoundsExhausted, SearchBounds, infer, search
from sti.itypes import Arrow, Inter, TVar, canonicalize, is_linear, parse_type, type_equal
from sti.measures import weight
from sti.terms import ARG, parse_term, term_size
from sti.transform import reduce_subject

from conftest import example_first, example_second, example_third


def report(capsys, number, title, ok, elapsed, limit, detail=""):
    status = "PASS" if ok and elapsed < limit else "FAIL"
    line = f"[acceptance {number}] {status}  {title}  ({elapsed:.2f}s / limit {limit:g}s)"
    if detail:
        line += f"  {detail}"
    with capsys.disabled():
        print("\n" + line)
    assert ok, detail
    assert elapsed < limit, f"took {elapsed:.2f}s, limit {limit}s"


@pytest.fixture(scope="module")
def corpus_run():
    """Corpus terms with their inferred derivations, and the time that took."""
    start = time.perf_counter()
    out = [(m, *search(m)[:2]) for m in gen_sn_terms(42, 500, 12)]
    return out, time.perf_counter() - start


@pytest.fixture(scope="module")
def monotonicity_run(corpus_run):
    corpus, _ = corpus_run
    start = time.perf_counter()
    reports = [check_weight_monotonicity(d, extra_r=3)
               for m, d, _ in corpus if term_size(m) <= 12]
    return reports, time.perf_counter() - start


def test_1_example_replay(capsys):
    start = time.perf_counter()
    first, second, third = example_first(), example_second(), example_third()
    checked = all(check_derivation(d).ok for d in (first, second, third))
    step1 = reduce_subject(first, (ARG,)).after
    step2 = reduce_subject(step1, ()).after
    chain = [first, step1, step2]
    w2 = [weight(d, 2) for d in chain]
    w1 = [weight(d, 1) for d in chain]
    ok = (checked and alpha_equivalent(step1, second) and alpha_equivalent(step2, third)
          and w2 == [13, 7, 3] and w1 == [9, 6, 3])
    report(capsys, 1, "example replay", ok, time.perf_counter() - start, 1,
           f"W(r=2) {w2}, W(r=1) {w1}")


def test_2_weight_bounds_on_corpus(capsys, corpus_run):
    corpus, infer_time = corpus_run
    start = time.perf_counter()
    bad = [m for m, d, _ in corpus if not all(check_lemma3m(d, range(1, 9)).values())]
    elapsed = infer_time + time.perf_counter() - start
    report(capsys, 2, "rank/size/weight inequalities", len(corpus) >= 500 and not bad,
           elapsed, 120, f"{len(corpus)} terms, {len(bad)} violations")


def test_3_weight_monotonicity(capsys, monotonicity_run):
    reports, elapsed = monotonicity_run
    violations = [v for r in reports for v in r.violations]
    edges = sum(r.edges for r in reports)
    report(capsys, 3, "weight decreases along every transported step", not violations,
           elapsed, 180, f"{len(reports)} terms, {edges} edges, {len(violations)} violations")


def test_4_reduction_bounds(capsys, corpus_run, monotonicity_run):
    corpus, _ = corpus_run
    _, mono_time = monotonicity_run
    start = time.perf_counter()
    bad = []
    for m, d, deg in corpus:
        r = verify_bounds(m, d)
        if not (r.ok and r.degree == deg):
            bad.append(r)
    elapsed = mono_time + time.perf_counter() - start
    report(capsys, 4, "longest reduction and normal forms below the bound", not bad,
           elapsed, 180, f"{len(corpus)} terms, {len(bad)} violations")


def test_5_remark_family(capsys):
    start = time.perf_counter()
    rows = remark_family_report(4)
    ok = [r.n for r in rows] == [1, 2, 3, 4] and all(r.ok for r in rows)
    detail = "; ".join(f"n={r.n}: |M|={r.subject_size} longest={r.longest_reduction} "
                       f"(D,R)=({r.degree},{r.rank})" for r in rows)
    report(capsys, 5, "remark family n=1..4", ok, time.perf_counter() - start, 30, detail)


def test_6_weighted_substitution(capsys, corpus_run):
    corpus, _ = corpus_run
    start = time.perf_counter()
    pairs = substitution_pairs([d for _, d, _ in corpus], 200, seed=42)
    checks = [check_weighted_substitution(s, p, x) for s, p, x in pairs]
    bad = [c for c in checks if not c.ok]
    report(capsys, 6, "weighted substitution", len(checks) == 200 and not bad,
           time.perf_counter() - start, 60, f"{len(checks)} pairs, {len(bad)} violations")


def _random_type(rng, depth=0):
    roll = rng.random()
    if depth >= 3 or roll < 0.35:
        return TVar(rng.choice("abc"))
    if roll < 0.7:
        cod = _random_type(rng, depth + 1)
        while not is_linear(cod):
            cod = _random_type(rng, depth + 1)
        return Arrow(_random_type(rng, depth + 1), cod)
    return Inter(tuple(_random_type(rng, depth + 1) for _ in range(rng.randint(2, 3))))


def test_7_type_algebra(capsys):
    start = time.perf_counter()
    A, B, C, a = (parse_type(s) for s in ("a -> b", "b", "c -> a", "a"))
    laws = [
        type_equal(Inter((A, a)), Inter((a, A))),
        not type_equal(Inter((A, A)), A),
        not type_equal(Inter((Inter((A, B)), C)), Inter((A, B, C))),
    ]
    rng = random.Random(7)
    sample = [_random_type(rng) for _ in range(1000)]
    idempotent = all(canonicalize(canonicalize(t)) == canonicalize(t) for t in sample)
    preserved = all(type_equal(canonicalize(t), t) for t in sample)
    ok = all(laws) and idempotent and preserved
    report(capsys, 7, "type algebra", ok, time.perf_counter() - start, 5,
           f"laws {laws}, canonicalize idempotent on 1000 types: {idempotent}")


def test_8_inference_soundness(capsys, corpus_run):
    corpus, infer_time = corpus_run
    start = time.perf_counter()
    unchecked = [m for m, d, _ in corpus if not check_derivation(d).ok]
    d = infer(parse_term(r"\x. x x"))
    self_app = type_equal(d.type, parse_type("((a -> a) ∧ a) -> a"))
    try:
        infer(parse_term(r"(\x. x x) (\x. x x)"), SearchBounds(time_fuel=200_000))
        omega = "typed"
    except BoundsExhausted as e:
        omega = "exhausted" if "untypable" not in str(e).lower() else "claimed untypable"
    ok = not unchecked and self_app and omega == "exhausted"
    elapsed = infer_time + time.perf_counter() - start
    report(capsys, 8, "inference soundness", ok, elapsed, 60,
           f"{len(corpus)} derivations checked, λx.xx : {d.type}, Ω {omega}")


def test_9_intersection_trees(capsys, corpus_run):
    corpus, _ = corpus_run
    start = time.perf_counter()
    bad = [v for _, d, _ in corpus for v in intersection_tree_violations(d)]
    report(capsys, 9, "intersection-typed subjects have proper intersection trees", not bad,
           time.perf_counter() - start, 60, f"{len(bad)} violations")

"""Hand-built derivations for (λx.xx)((λy.y)z) → (λx.xx)z → zz.

They are assembled rule by rule from the smart constructors, without
touching the transformation code, so they can serve as golden values.
"""

import pytest

from sti.derivation import and_n, arrow_e, arrow_i, ax, mux
from sti.itypes import Arrow, TVar

a = TVar("a")
A = Arrow(a, a)


def self_app():
    """⊢ λx. x x : ((a→a) ∧ a) → a"""
    return arrow_i(mux(arrow_e(ax("x1", A), ax("x2", a)), ["x1", "x2"], "x"), "x")


def id_applied(t):
    """z: t ⊢ (λy. y) z : t"""
    return arrow_e(arrow_i(ax("y", t), "y"), ax("z", t))


def example_first():
    return arrow_e(self_app(), and_n([id_applied(A), id_applied(a)]))


def example_second():
    return arrow_e(self_app(), and_n([ax("z", A), ax("z", a)]))


def example_third():
    return mux(arrow_e(ax("z1", A), ax("z2", a)), ["z1", "z2"], "z")


@pytest.fixture
def example():
    return [example_first(), example_second(), example_third()]


@pytest.fixture
def identity():
    return arrow_i(ax("x", a), "x")


@pytest.fixture(scope="session")
def corpus():
    """(term, derivation, minimal degree) for the default generated corpus."""
    from sti.harness import gen_sn_terms
    from sti.inference import search

    out = []
    for m in gen_sn_terms(42, 500, 12):
        d, degree, _ = search(m)
        out.append((m, d, degree))
    return out

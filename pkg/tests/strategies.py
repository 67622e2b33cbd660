"""Hypothesis strategies for terms and types."""

from hypothesis import strategies as st

from sti.itypes import Arrow, Inter, TVar, is_linear
from sti.terms import App, Lam, Var, free_vars

NAMES = ["x", "y", "z", "u", "v"]


def terms(max_leaves=12, names=NAMES):
    var = st.sampled_from(names).map(Var)
    return st.recursive(
        var,
        lambda sub: st.one_of(
            st.builds(Lam, st.sampled_from(names), sub),
            st.builds(App, sub, sub),
        ),
        max_leaves=max_leaves,
    )


def closed_terms(max_leaves=10):
    def close(t):
        for v in sorted(free_vars(t)):
            t = Lam(v, t)
        return t
    return terms(max_leaves).map(close)


def types(max_leaves=8):
    """Arbitrary types: linear ones and (possibly nested) intersections."""
    atom = st.sampled_from(["a", "b", "c"]).map(TVar)

    def extend(children):
        inter = st.lists(children, min_size=2, max_size=3).map(lambda cs: Inter(tuple(cs)))
        arrow = st.builds(Arrow, children, children.filter(is_linear))
        return st.one_of(inter, arrow)

    return st.recursive(atom, extend, max_leaves=max_leaves)

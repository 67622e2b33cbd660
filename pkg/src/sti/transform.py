"""Derivation surgery: substitution, δ-commutation and subject reduction.

``subst_derivation`` builds S(Σ, Π) by recursion on Π.  The interesting
cases are a weakened substitution variable (its replacement context is
reintroduced by (w) and (m) steps), (∧n) and (m): there Σ is split into
the leaves of its intersection tree, one per copy, and reassembled
afterwards.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .derivation import (DeltaStep, Derivation, Rule, and_n, arrow_e, arrow_i,
                         check_derivation, decompose_intersection_tree, freshen,
                         introduce, mux, peel_delta, rebuild, rename_free_var, replay_delta,
                         weaken)
from .itypes import IType, ctx_disjoint_union, format_type
from .measures import MeasureReport, measure_report, rank, weight
from .terms import (ARG, BODY, DEFAULT_FUEL, FUN, FuelExhausted, RedexError, Strategy,
                    Term, _is_redex, format_term, fresh_name, pick_redex, reduce_at,
                    substitute, subterm_at)

__all__ = ["TransformError", "DeltaSequence", "subst_derivation", "commute_delta",
           "reduce_subject", "DerivedStep", "TraceEntry", "ReductionTrace",
           "normalize_with_derivation"]

DeltaSequence = list[DeltaStep]


class TransformError(RuntimeError):
    """Precondition failure, or a broken internal invariant."""


# --------------------------------------------------------------------------
# substitution

def subst_derivation(sigma: Derivation, pi: Derivation, x: str) -> Derivation:
    """S(Σ, Π): from Σ ▷ Δ ⊢ N: σ and Π ▷ Γ, x: σ ⊢ M: τ build Γ, Δ ⊢ M[N/x]: τ."""
    if x not in pi.ctx:
        raise TransformError(f"{x} is not bound in the context of Π")
    if x in sigma.ctx:
        raise TransformError(f"{x} must not be bound in the context of Σ")
    gamma = pi.ctx.remove(x)
    overlap = gamma.domain & sigma.ctx.domain
    if overlap:
        raise TransformError(f"Γ # Δ fails on {', '.join(sorted(overlap))}")
    if pi.ctx[x] != sigma.type:
        raise TransformError(
            f"{x} has type {format_type(pi.ctx[x])} but Σ proves {format_type(sigma.type)}")

    result = _subst(sigma, pi, x)

    if result.ctx != ctx_disjoint_union(gamma, sigma.ctx):
        raise TransformError("substitution changed the context")
    if result.type != pi.type:
        raise TransformError("substitution changed the type")
    if result.term != substitute(pi.term, x, sigma.term):
        raise TransformError("substitution produced the wrong subject")
    return result


def _split(sigma: Derivation, wanted: list[IType]) -> tuple[list[Derivation], tuple]:
    """Leaves of Σ's top (∧n) matched to the wanted types, plus Σ's trailing δ."""
    tree = decompose_intersection_tree(sigma)
    if tree.is_empty or len(tree.children) != len(wanted):
        raise TransformError("Σ does not end with a matching intersection tree")
    pool = [c.root for c in tree.children]
    used = [False] * len(pool)
    out = []
    for t in wanted:
        for j, cand in enumerate(pool):
            if not used[j] and cand.type == t:
                used[j] = True
                out.append(cand)
                break
        else:
            raise TransformError(f"no component of Σ has type {format_type(t)}")
    return out, tree.delta


def _subst(sigma: Derivation, pi: Derivation, x: str) -> Derivation:
    pi = freshen(pi, sigma.names)
    sigma = freshen(sigma, pi.names)
    r = pi.rule

    if r is Rule.AX:
        return sigma

    if r is Rule.WEAKEN:
        if pi.var != x:
            return weaken(_subst(sigma, pi.premises[0], x), pi.var, pi.ctx[pi.var])
        # x was weakened in: drop Σ, reintroduce its context
        d = pi.premises[0]
        taken = set(pi.names | sigma.names)
        for v, t in sigma.ctx.items():
            d = introduce(d, v, t, taken)
        return d

    if r is Rule.ARROW_I:
        return arrow_i(_subst(sigma, pi.premises[0], x), pi.var)

    if r is Rule.ARROW_E:
        f, a = pi.premises
        if x in f.ctx:
            return arrow_e(_subst(sigma, f, x), a)
        return arrow_e(f, _subst(sigma, a, x))

    if r is Rule.AND:
        holders = [i for i, p in enumerate(pi.premises) if x in p.ctx]
        premises = list(pi.premises)
        if len(holders) == 1:
            (i,) = holders
            premises[i] = _subst(sigma, premises[i], x)
            return and_n(premises)
        parts, delta = _split(sigma, [premises[i].ctx[x] for i in holders])
        for i, part in zip(holders, parts):
            premises[i] = _subst(part, premises[i], x)
        return replay_delta(and_n(premises), delta)

    # (m)
    body = pi.premises[0]
    if pi.var != x:
        return mux(_subst(sigma, body, x), pi.merged, pi.var)
    sources = pi.merged
    parts, delta = _split(sigma, [body.ctx[s] for s in sources])

    # give every copy its own names for variables shared between copies
    counts = Counter(v for part in parts for v in part.ctx)
    taken = set(pi.names | sigma.names)
    copies: dict[str, list[str]] = {}
    renamed = []
    for part in parts:
        for v in list(part.ctx):
            if counts[v] >= 2:
                new = fresh_name(v, taken)
                taken.add(new)
                part = rename_free_var(part, v, new)
                copies.setdefault(v, []).append(new)
        renamed.append(part)

    d = body
    for src, part in zip(sources, renamed):
        d = _subst(part, d, src)
    for v, names in copies.items():
        d = mux(d, names, v)
    return replay_delta(d, delta)


# --------------------------------------------------------------------------
# subject reduction

def commute_delta(leaf: Derivation) -> Derivation:
    """Move the δ-sequence under the function premise of an (→E) below it.

    ``leaf`` is (→E) whose function premise is δ over (→I); the result
    has the same conclusion, with (→I) feeding (→E) directly.
    """
    if leaf.rule is not Rule.ARROW_E:
        raise TransformError("commute_delta expects an (→E) node")
    f, a = leaf.premises
    core, steps = peel_delta(f)
    if core.rule is not Rule.ARROW_I:
        raise TransformError("function premise is not δ over (→I)")
    if not steps:
        return leaf
    f = freshen(f, a.ctx.domain)
    core, steps = peel_delta(f)
    return replay_delta(arrow_e(core, a), steps)


def _contract(leaf: Derivation) -> Derivation:
    e = commute_delta(leaf)
    core, steps = peel_delta(e)
    lam, arg = core.premises
    return replay_delta(subst_derivation(arg, lam.premises[0], lam.var), steps)


@dataclass
class DerivedStep:
    before: Derivation
    redex: tuple
    after: Derivation
    virtual_copies: int


def reduce_subject(pi: Derivation, redex: Iterable[str], verify: bool = True) -> DerivedStep:
    """Transport one beta-step at ``redex`` through pi.

    Every leaf of an intersection tree met on the way holds a copy of the
    redex; each copy is contracted, so ``virtual_copies`` may exceed 1.
    """
    path = tuple(redex)
    if not _is_redex(subterm_at(pi.term, path)):
        raise RedexError(f"no redex at {list(path)} in {format_term(pi.term)}")
    copies = 0

    def go(d: Derivation, path: tuple) -> Derivation:
        nonlocal copies
        r = d.rule
        if r in (Rule.WEAKEN, Rule.MUX):
            return rebuild(d, (go(d.premises[0], path),))
        if r is Rule.AND:
            return and_n(go(p, path) for p in d.premises)
        if not path:
            if r is not Rule.ARROW_E:
                raise TransformError("redex is not typed by (→E)")
            copies += 1
            return _contract(d)
        step, rest = path[0], path[1:]
        if r is Rule.ARROW_I and step == BODY:
            return arrow_i(go(d.premises[0], rest), d.var)
        if r is Rule.ARROW_E and step == FUN:
            return arrow_e(go(d.premises[0], rest), d.premises[1])
        if r is Rule.ARROW_E and step == ARG:
            return arrow_e(d.premises[0], go(d.premises[1], rest))
        raise TransformError(f"position step {step!r} does not match rule {r.label}")

    after = go(pi, path)
    if verify:
        if after.ctx != pi.ctx or after.type != pi.type:
            raise TransformError("subject reduction changed the conclusion")
        if after.term != reduce_at(pi.term, path):
            raise TransformError("subject reduction produced the wrong subject")
        report = check_derivation(after)
        if not report.ok:
            raise TransformError(f"reduced derivation fails the checker:\n{report}")
    return DerivedStep(pi, path, after, copies)


# --------------------------------------------------------------------------
# normalization with derivations

@dataclass
class TraceEntry:
    term: Term
    derivation: Derivation
    measures: MeasureReport
    redex: tuple | None = None
    virtual_copies: int = 0

    def to_json(self) -> dict:
        return {
            "term": format_term(self.term),
            "redex": None if self.redex is None else list(self.redex),
            "virtual_copies": self.virtual_copies,
            "measures": self.measures.to_json(),
        }


@dataclass
class ReductionTrace:
    entries: list[TraceEntry] = field(default_factory=list)
    initial_rank: int = 1

    @property
    def steps(self) -> int:
        return len(self.entries) - 1

    def weights(self, r: int) -> list[int]:
        return [weight(e.derivation, r) for e in self.entries]

    def to_json(self) -> list:
        return [e.to_json() for e in self.entries]


def normalize_with_derivation(pi: Derivation, strategy: Strategy | str = Strategy.LEFTMOST_OUTERMOST,
                              fuel: int = DEFAULT_FUEL) -> ReductionTrace:
    """Normalize pi's subject, carrying the derivation along every step.

    The weight at the initial rank must strictly drop at each step; a
    failure raises TransformError.
    """
    r0 = rank(pi)
    rs = sorted({1, r0})
    trace = ReductionTrace(initial_rank=r0)
    current = pi
    while True:
        entry = TraceEntry(current.term, current, measure_report(current, rs))
        trace.entries.append(entry)
        p = pick_redex(current.term, strategy)
        if p is None:
            return trace
        if trace.steps >= fuel:
            raise FuelExhausted(f"no normal form within {fuel} steps", trace.entries)
        step = reduce_subject(current, p)
        entry.redex = p
        entry.virtual_copies = step.virtual_copies
        w_before, w_after = weight(current, r0), weight(step.after, r0)
        if not w_after < w_before:
            raise TransformError(f"weight at r={r0} did not decrease: {w_before} -> {w_after}")
        current = step.after

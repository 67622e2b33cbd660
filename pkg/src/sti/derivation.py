"""Typing derivations for the six rules (Ax), (w), (→I), (→E), (∧n), (m).

Every node stores its own conclusion sequent; the smart constructors
compute it from the premises and ``check_derivation`` re-validates each
node locally.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple

from .itypes import (Arrow, Context, IType, Inter, ctx_disjoint_union,
                     ctx_intersect, format_type, is_linear)
from .terms import (App, Lam, Term, Var, all_names, format_term, free_vars, fresh_name,
                    rename_instance, renaming_witness)

__all__ = [
    "Rule", "Derivation", "Sequent", "DerivationError", "ax", "weaken",
    "arrow_i", "arrow_e", "and_n", "mux", "introduce", "Violation", "CheckReport",
    "check_derivation", "DeltaStep", "peel_delta", "replay_delta",
    "IntersectionTree", "decompose_intersection_tree", "rename_free_var",
    "freshen", "derivation_key", "alpha_equivalent", "iter_nodes", "rebuild",
]


class Rule(str, enum.Enum):
    AX = "ax"
    WEAKEN = "w"
    ARROW_I = "arrow_i"
    ARROW_E = "arrow_e"
    AND = "and"
    MUX = "mux"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @property
    def constructive(self) -> bool:
        return self in (Rule.AX, Rule.ARROW_I, Rule.ARROW_E)


_LABELS = {Rule.AX: "Ax", Rule.WEAKEN: "w", Rule.ARROW_I: "→I", Rule.ARROW_E: "→E",
           Rule.AND: "∧", Rule.MUX: "m"}


class DerivationError(ValueError):
    pass


class Sequent(NamedTuple):
    ctx: Context
    term: Term
    type: IType

    def __str__(self):
        left = f"{self.ctx} ⊢" if len(self.ctx) else "⊢"
        return f"{left} {format_term(self.term)}: {format_type(self.type)}"


@dataclass(frozen=True, eq=False)
class Derivation:
    rule: Rule
    ctx: Context
    term: Term
    type: IType
    premises: tuple = ()
    # (w): added variable; (→I): binder; (m): fresh target variable
    var: str | None = None
    # (m): merged variables x1..xn
    merged: tuple = field(default=())

    @property
    def conclusion(self) -> Sequent:
        return Sequent(self.ctx, self.term, self.type)

    @cached_property
    def names(self) -> frozenset[str]:
        out = set(self.ctx) | all_names(self.term) | set(self.merged)
        if self.var is not None:
            out.add(self.var)
        for p in self.premises:
            out |= p.names
        return frozenset(out)

    def __str__(self):
        return f"{self.conclusion}  ({self.rule.label})"


# --------------------------------------------------------------------------
# smart constructors

def ax(x: str, t: IType) -> Derivation:
    return Derivation(Rule.AX, Context({x: t}), Var(x), t)


def weaken(d: Derivation, x: str, t: IType) -> Derivation:
    if not is_linear(t):
        raise DerivationError(f"(w) needs a linear type, got {format_type(t)}")
    return Derivation(Rule.WEAKEN, d.ctx.extend(x, t), d.term, d.type, (d,), var=x)


def arrow_i(d: Derivation, x: str) -> Derivation:
    if x not in d.ctx:
        raise DerivationError(f"(→I): {x} is not bound in the premise context")
    if not is_linear(d.type):
        raise DerivationError("(→I): premise type must be linear")
    return Derivation(Rule.ARROW_I, d.ctx.remove(x), Lam(x, d.term), Arrow(d.ctx[x], d.type),
                      (d,), var=x)


def arrow_e(f: Derivation, a: Derivation) -> Derivation:
    if not isinstance(f.type, Arrow):
        raise DerivationError(f"(→E): function type {format_type(f.type)} is not an arrow")
    return Derivation(Rule.ARROW_E, ctx_disjoint_union(f.ctx, a.ctx), App(f.term, a.term),
                      f.type.cod, (f, a))


def and_n(ds: Iterable[Derivation]) -> Derivation:
    ds = tuple(ds)
    if len(ds) < 2:
        raise DerivationError("(∧n) needs n > 1 premises")
    return Derivation(Rule.AND, ctx_intersect([d.ctx for d in ds]), ds[0].term,
                      Inter(tuple(d.type for d in ds)), ds)


def mux(d: Derivation, merged: Iterable[str], x: str) -> Derivation:
    merged = tuple(merged)
    if len(merged) < 2:
        raise DerivationError("(m) merges at least two variables")
    missing = [v for v in merged if v not in d.ctx]
    if missing:
        raise DerivationError(f"(m): {', '.join(missing)} not in the premise context")
    if x in d.ctx or x in merged:
        raise DerivationError(f"(m): target {x} is not fresh")
    merged_type = Inter(tuple(d.ctx[v] for v in merged))
    live = [v for v in merged if v in free_vars(d.term)]
    term = rename_instance(d.term, live, x)
    return Derivation(Rule.MUX, d.ctx.remove(*merged).extend(x, merged_type), term, d.type,
                      (d,), var=x, merged=merged)


def introduce(d: Derivation, x: str, t: IType, taken: set[str]) -> Derivation:
    """Add x: t to the context by (w) steps on linear elements, re-merged by (m) steps.

    ``taken`` holds names to avoid for the intermediate variables and is updated.
    """
    if is_linear(t):
        return weaken(d, x, t)
    parts = []
    for child in t.children:
        v = fresh_name(x, taken)
        taken.add(v)
        d = introduce(d, v, child, taken)
        parts.append(v)
    return mux(d, parts, x)


def rebuild(d: Derivation, premises: tuple) -> Derivation:
    """Same rule and rule data as d, over new premises."""
    r = d.rule
    if r is Rule.AX:
        return d
    if r is Rule.WEAKEN:
        return weaken(premises[0], d.var, d.ctx[d.var])
    if r is Rule.ARROW_I:
        return arrow_i(premises[0], d.var)
    if r is Rule.ARROW_E:
        return arrow_e(*premises)
    if r is Rule.AND:
        return and_n(premises)
    return mux(premises[0], d.merged, d.var)


def iter_nodes(d: Derivation, path: tuple = ()) -> Iterator[tuple[tuple, Derivation]]:
    yield path, d
    for i, p in enumerate(d.premises):
        yield from iter_nodes(p, path + (i,))


# --------------------------------------------------------------------------
# local checking

@dataclass(frozen=True)
class Violation:
    path: tuple
    rule: str
    message: str

    def __str__(self):
        where = "/".join(map(str, self.path)) or "root"
        return f"[{where}] ({self.rule}) {self.message}"


@dataclass
class CheckReport:
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "ok" if self.ok else "\n".join(map(str, self.violations))


_ARITY = {Rule.AX: 0, Rule.WEAKEN: 1, Rule.ARROW_I: 1, Rule.ARROW_E: 2, Rule.MUX: 1}


def _check_node(d: Derivation) -> list[str]:
    errs: list[str] = []
    r = d.rule
    ps = d.premises
    want = _ARITY.get(r)
    if want is not None and len(ps) != want:
        return [f"expected {want} premises, found {len(ps)}"]
    if r is Rule.AND and len(ps) < 2:
        return ["(∧n) requires n > 1"]

    missing = free_vars(d.term) - d.ctx.domain
    if missing:
        errs.append(f"free variables {sorted(missing)} not in context")

    if r is Rule.AX:
        if not isinstance(d.term, Var):
            errs.append("axiom subject must be a variable")
        elif dict(d.ctx) != {d.term.name: d.type}:
            errs.append("axiom context must be exactly the subject variable with the conclusion type")
        if not is_linear(d.type):
            errs.append("axiom requires linear type")
        return errs

    if r is Rule.WEAKEN:
        (p,) = ps
        x = d.var
        if x is None or x not in d.ctx:
            return errs + ["weakened variable missing from conclusion context"]
        if x in p.ctx:
            errs.append(f"x ∉ dom(Γ) fails: {x} already bound in premise")
        if not is_linear(d.ctx[x]):
            errs.append("weakening requires linear type")
        if d.ctx.remove(x) != p.ctx.remove(x):
            errs.append("context must be premise context plus the weakened variable")
        if d.term != p.term:
            errs.append("subject changed across (w)")
        if d.type != p.type:
            errs.append("type changed across (w)")
        return errs

    if r is Rule.ARROW_I:
        (p,) = ps
        x = d.var
        if x is None or x not in p.ctx:
            return errs + ["abstracted variable not bound in premise context"]
        if d.term != Lam(x, p.term):
            errs.append("subject must be the abstraction of the premise subject")
        if d.ctx != p.ctx.remove(x):
            errs.append("context must be premise context without the abstracted variable")
        if not is_linear(p.type):
            errs.append("premise type must be linear")
        elif d.type != Arrow(p.ctx[x], p.type):
            errs.append("type must be σ → A for premise x: σ ⊢ M: A")
        return errs

    if r is Rule.ARROW_E:
        f, a = ps
        if not isinstance(f.type, Arrow):
            return errs + ["function premise type is not an arrow"]
        if a.type != f.type.dom:
            errs.append("argument type does not match the arrow domain")
        overlap = f.ctx.domain & a.ctx.domain
        if overlap:
            errs.append(f"Γ # Δ fails on {', '.join(sorted(overlap))}")
        elif d.ctx != ctx_disjoint_union(f.ctx, a.ctx):
            errs.append("context must be the union of premise contexts")
        if d.term != App(f.term, a.term):
            errs.append("subject must be the application of the premise subjects")
        if d.type != f.type.cod:
            errs.append("type must be the arrow codomain")
        return errs

    if r is Rule.AND:
        if any(p.term != d.term for p in ps):
            errs.append("(∧n) premises and conclusion must share the subject")
        if d.type != Inter(tuple(p.type for p in ps)):
            errs.append("type must be the n-ary intersection of premise types")
        if d.ctx != ctx_intersect([p.ctx for p in ps]):
            errs.append("context must be the intersection of premise contexts")
        return errs

    # (m)
    (p,) = ps
    xs, x = d.merged, d.var
    if len(xs) < 2:
        return errs + ["(m) requires n > 1 merged variables"]
    if len(set(xs)) != len(xs):
        return errs + ["merged variables must be distinct"]
    absent = [v for v in xs if v not in p.ctx]
    if absent:
        return errs + [f"merged variables {absent} not in premise context"]
    if x is None or x in xs or x in p.ctx:
        return errs + ["target variable must be fresh"]
    expected = p.ctx.remove(*xs).extend(x, Inter(tuple(p.ctx[v] for v in xs)))
    if d.ctx != expected:
        errs.append("context must rebind the merged variables to the target")
    live = [v for v in xs if v in free_vars(p.term)]
    if d.term != rename_instance(p.term, live, x):
        errs.append("subject must be the premise subject with merged variables renamed")
    if d.type != p.type:
        errs.append("type changed across (m)")
    return errs


def check_derivation(d: Derivation) -> CheckReport:
    """Validate every node; all violations are collected, with node paths."""
    out = []
    for path, node in iter_nodes(d):
        try:
            msgs = _check_node(node)
        except (ValueError, TypeError) as exc:
            msgs = [f"malformed node: {exc}"]
        out.extend(Violation(path, node.rule.label, m) for m in msgs)
    return CheckReport(out)


# --------------------------------------------------------------------------
# δ-sequences and intersection trees

@dataclass(frozen=True)
class DeltaStep:
    rule: Rule
    var: str
    merged: tuple = ()
    type: IType | None = None   # for (w)

    def apply(self, d: Derivation) -> Derivation:
        if self.rule is Rule.WEAKEN:
            return weaken(d, self.var, self.type)
        return mux(d, self.merged, self.var)


def peel_delta(d: Derivation) -> tuple[Derivation, list[DeltaStep]]:
    """Strip trailing (w)/(m) nodes; steps are returned innermost first."""
    steps = []
    while d.rule in (Rule.WEAKEN, Rule.MUX):
        if d.rule is Rule.WEAKEN:
            steps.append(DeltaStep(Rule.WEAKEN, d.var, type=d.ctx[d.var]))
        else:
            steps.append(DeltaStep(Rule.MUX, d.var, merged=d.merged))
        d = d.premises[0]
    steps.reverse()
    return d, steps


def replay_delta(d: Derivation, steps: Iterable[DeltaStep]) -> Derivation:
    for s in steps:
        d = s.apply(d)
    return d


@dataclass(frozen=True)
class IntersectionTree:
    """Root structure of (∧n) nodes under trailing δ-sequences.

    ``node`` is the (∧n) node reached after peeling ``delta`` from
    ``root``, or the constructive leaf when the tree is empty.
    """
    root: Derivation
    delta: tuple
    node: Derivation
    children: tuple

    @property
    def is_empty(self) -> bool:
        return not self.children

    def leaves(self) -> list[Derivation]:
        if self.is_empty:
            return [self.node]
        return [leaf for c in self.children for leaf in c.leaves()]

    def depth(self) -> int:
        return 0 if self.is_empty else 1 + max(c.depth() for c in self.children)


def decompose_intersection_tree(d: Derivation) -> IntersectionTree:
    core, steps = peel_delta(d)
    children = ()
    if core.rule is Rule.AND:
        children = tuple(decompose_intersection_tree(p) for p in core.premises)
    return IntersectionTree(d, tuple(steps), core, children)


def leaf_instance_witnesses(tree: IntersectionTree) -> list[dict | None]:
    """For each leaf, the free-variable renaming taking its subject to the root subject."""
    return [renaming_witness(leaf.term, tree.root.term) for leaf in tree.leaves()]


# --------------------------------------------------------------------------
# renaming

def rename_free_var(d: Derivation, old: str, new: str) -> Derivation:
    """Rename a context variable of d's conclusion throughout the derivation."""
    if old not in d.ctx or old == new:
        return d
    if new in d.names:
        d = freshen(d, {new})
    return _rename(d, old, new)


def _rename(d: Derivation, old: str, new: str) -> Derivation:
    if old not in d.ctx:
        return d
    r = d.rule
    if r is Rule.AX:
        return ax(new, d.type)
    if r is Rule.WEAKEN and d.var == old:
        return weaken(d.premises[0], new, d.ctx[old])
    if r is Rule.MUX and d.var == old:
        return mux(d.premises[0], d.merged, new)
    return rebuild(d, tuple(_rename(p, old, new) for p in d.premises))


def freshen(d: Derivation, avoid: Iterable[str], taken: set[str] | None = None) -> Derivation:
    """Rename internal names of d (binders, merged variables) that fall in avoid.

    Conclusion-context variables are left alone; the result is the same
    derivation up to alpha.
    """
    avoid = frozenset(avoid)
    if not (avoid & d.names):
        return d
    if taken is None:
        taken = set()
    taken |= avoid | d.names
    return _freshen(d, avoid, taken)


def _freshen(d: Derivation, avoid: frozenset, taken: set) -> Derivation:
    if not (avoid & d.names):
        return d
    if d.rule is Rule.ARROW_I and d.var in avoid:
        new = fresh_name(d.var, taken)
        taken.add(new)
        p = _rename(d.premises[0], d.var, new)
        return arrow_i(_freshen(p, avoid, taken), new)
    if d.rule is Rule.MUX and avoid & set(d.merged):
        p = d.premises[0]
        merged = list(d.merged)
        for i, v in enumerate(merged):
            if v in avoid:
                new = fresh_name(v, taken)
                taken.add(new)
                p = _rename(p, v, new)
                merged[i] = new
        return mux(_freshen(p, avoid, taken), merged, d.var)
    return rebuild(d, tuple(_freshen(p, avoid, taken) for p in d.premises))


# --------------------------------------------------------------------------
# equality up to renaming of internal variables

def _term_key(t: Term, ren: dict, env: tuple = ()) -> tuple:
    if isinstance(t, Var):
        if t.name in env:
            return ("b", env.index(t.name))
        return ("f", ren.get(t.name, t.name))
    if isinstance(t, Lam):
        return ("l", _term_key(t.body, ren, (t.var,) + env))
    return ("a", _term_key(t.fun, ren, env), _term_key(t.arg, ren, env))


def derivation_key(d: Derivation) -> tuple:
    """Hashable key equal for derivations that differ only in internal variable names
    (binders and merged variables), in subject bound names, and in the order of
    children inside intersection types.  The order of (∧n) premises is significant."""
    counter = itertools.count()

    def canon(d: Derivation, ren: dict) -> tuple:
        ctx_key = tuple(sorted((ren[v], t.key) for v, t in d.ctx.items()))
        head = (d.rule.value, ctx_key, _term_key(d.term, ren), d.type.key)
        r = d.rule
        if r is Rule.AX:
            return head
        if r is Rule.WEAKEN:
            sub = {k: v for k, v in ren.items() if k != d.var}
            return head + (ren[d.var], canon(d.premises[0], sub))
        if r is Rule.ARROW_I:
            sub = dict(ren)
            sub[d.var] = f"#{next(counter)}"
            return head + (canon(d.premises[0], sub),)
        if r is Rule.MUX:
            sub = {k: v for k, v in ren.items() if k != d.var}
            fresh = []
            for v in d.merged:
                sub[v] = f"#{next(counter)}"
                fresh.append(sub[v])
            return head + (tuple(fresh), ren[d.var], canon(d.premises[0], sub))
        return head + tuple(canon(p, {k: ren[k] for k in p.ctx}) for p in d.premises)

    return canon(d, {v: v for v in d.ctx})


def alpha_equivalent(a: Derivation, b: Derivation) -> bool:
    return derivation_key(a) == derivation_key(b)

"""Bounded derivation search.

The search is syntax directed.  The subject is first α-renamed so that all
binders are distinct, then linearized: a variable with k >= 2 occurrences
gets k distinct occurrence names, merged back by one (m) right below its
binder (or at the root for free variables); a vacuous binder is
introduced by (w).  Variables get fresh linear unification variables.  At
an application the argument is typed once per leaf of a "shape": a tree
of (∧n) nodes.  The shape is forced when the function already has an
arrow type and is a choice point otherwise.

Minimality is by degree first (iterative deepening, so a returned degree
d comes with an exhaustive failure at d - 1), then proof size (branch and
bound), then the canonical key of the conclusion type.  Left-over
unification variables are all instantiated to the single atom ``a``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Mapping

from .derivation import Derivation, and_n, arrow_e, arrow_i, ax, introduce, mux, weaken
from .itypes import Arrow, Context, IType, Inter, TVar, element_count, is_linear
from .terms import App, Lam, Term, Var, all_names, fresh_name, free_vars

__all__ = ["SearchBounds", "SearchStats", "BoundsExhausted", "infer", "infer_minimal_depth",
           "infer_with_context", "search"]

DEFAULT_ATOM = "a"


@dataclass(frozen=True)
class SearchBounds:
    max_type_elements: int = 8
    max_degree: int = 4
    max_proof_size: int = 300
    time_fuel: int = 1_000_000

    def __post_init__(self):
        if self.max_type_elements < 1 or self.max_proof_size < 1 or self.time_fuel < 1:
            raise ValueError("search bounds must be positive")
        if self.max_degree < 0:
            raise ValueError("max_degree must be non-negative")


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    memo_hits: int = 0
    solutions_seen: int = 0
    degrees_tried: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"nodes_expanded": self.nodes_expanded, "memo_hits": self.memo_hits,
                "solutions_seen": self.solutions_seen, "degrees_tried": list(self.degrees_tried)}


class BoundsExhausted(RuntimeError):
    """No derivation found within the bounds.  Says nothing about typability."""

    def __init__(self, message: str, stats: SearchStats | None = None):
        super().__init__(message)
        self.stats = stats


class _OutOfFuel(Exception):
    pass


# --------------------------------------------------------------------------
# unification variables are type variables whose name starts with '?'

def _is_uvar(t: IType) -> bool:
    return isinstance(t, TVar) and t.name.startswith("?")


def _walk(t: IType, s: Mapping) -> IType:
    while _is_uvar(t) and t.name in s:
        t = s[t.name]
    return t


def _resolve(t: IType, s: Mapping, default: TVar | None = None) -> IType:
    t = _walk(t, s)
    if isinstance(t, TVar):
        if default is not None and _is_uvar(t):
            return default
        return t
    if isinstance(t, Arrow):
        return Arrow(_resolve(t.dom, s, default), _resolve(t.cod, s, default))
    return Inter(tuple(_resolve(c, s, default) for c in t.children))


def _occurs(name: str, t: IType, s: Mapping) -> bool:
    t = _walk(t, s)
    if isinstance(t, TVar):
        return t.name == name
    if isinstance(t, Arrow):
        return _occurs(name, t.dom, s) or _occurs(name, t.cod, s)
    return any(_occurs(name, c, s) for c in t.children)


def _bind(u: TVar, t: IType, s: dict) -> dict | None:
    if not is_linear(t) or _occurs(u.name, t, s):
        return None
    out = dict(s)
    out[u.name] = t
    return out


def _unify(a: IType, b: IType, s: dict, ordered: bool = False) -> Iterator[dict]:
    """All most general unifiers extending s, commutative on intersections.

    ``ordered`` matches intersection children positionally; it is used
    where the two sides were built with the same shape, which makes the
    other permutations redundant.
    """
    a, b = _walk(a, s), _walk(b, s)
    if _is_uvar(a) or _is_uvar(b):
        if a == b:
            yield s
            return
        u, t = (a, b) if _is_uvar(a) else (b, a)
        s2 = _bind(u, t, s)
        if s2 is not None:
            yield s2
        return
    if isinstance(a, TVar) or isinstance(b, TVar):
        if isinstance(a, TVar) and isinstance(b, TVar) and a.name == b.name:
            yield s
        return
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        for s1 in _unify(a.dom, b.dom, s):
            yield from _unify(a.cod, b.cod, s1)
        return
    if isinstance(a, Inter) and isinstance(b, Inter) and len(a.children) == len(b.children):
        if ordered:
            orders = [b.children]
        else:
            orders = _distinct_orders(b.children, s)
        for order in orders:
            yield from _unify_all(a.children, order, s, ordered)


def _distinct_orders(children: tuple, s: Mapping) -> list[tuple]:
    seen = set()
    out = []
    for perm in itertools.permutations(range(len(children))):
        order = tuple(children[i] for i in perm)
        key = tuple(repr(_resolve(c, s)) for c in order)
        if key not in seen:
            seen.add(key)
            out.append(order)
    return out


def _unify_all(xs, ys, s, ordered) -> Iterator[dict]:
    if not xs:
        yield s
        return
    for s1 in _unify(xs[0], ys[0], s, ordered):
        yield from _unify_all(xs[1:], ys[1:], s1, ordered)


# --------------------------------------------------------------------------
# shapes: None is a single typing, a tuple is an (∧n) over child shapes

def _shape_of(t: IType):
    if isinstance(t, Inter):
        return tuple(_shape_of(c) for c in t.children)
    return None


def _shape_depth(shape) -> int:
    return 0 if shape is None else 1 + max(_shape_depth(c) for c in shape)


def _shape_leaves(shape) -> int:
    return 1 if shape is None else sum(_shape_leaves(c) for c in shape)


@lru_cache(maxsize=None)
def _shapes(depth: int, arity: int, leaves: int) -> tuple:
    """Shapes of nesting at most depth, arity at most arity, at most leaves leaves; smallest first."""
    if depth == 0 or arity < 2 or leaves < 2:
        return (None,)
    sub = _shapes(depth - 1, arity, leaves)
    out = [None]
    for n in range(2, arity + 1):
        for combo in itertools.combinations_with_replacement(range(len(sub)), n):
            shape = tuple(sub[i] for i in combo)
            if _shape_leaves(shape) <= leaves:
                out.append(shape)
    out.sort(key=lambda sh: (_shape_leaves(sh), _shape_depth(sh)))
    return tuple(out)


# --------------------------------------------------------------------------
# preparation: unique binders and linear occurrence names

def _uniquify(m: Term, taken: set) -> Term:
    if isinstance(m, Var):
        return m
    if isinstance(m, App):
        return App(_uniquify(m.fun, taken), _uniquify(m.arg, taken))
    x, body = m.var, m.body
    if x in taken:
        new = fresh_name(x, taken | all_names(body))
        body = _rename_free(body, x, new)
        x = new
    taken.add(x)
    return Lam(x, _uniquify(body, taken))


def _rename_free(m: Term, old: str, new: str) -> Term:
    if isinstance(m, Var):
        return Var(new) if m.name == old else m
    if isinstance(m, App):
        return App(_rename_free(m.fun, old, new), _rename_free(m.arg, old, new))
    if m.var == old:
        return m
    return Lam(m.var, _rename_free(m.body, old, new))


def _count(m: Term, counts: dict):
    if isinstance(m, Var):
        counts[m.name] = counts.get(m.name, 0) + 1
    elif isinstance(m, App):
        _count(m.fun, counts)
        _count(m.arg, counts)
    else:
        counts.setdefault(m.var, 0)
        _count(m.body, counts)


def _linearize(m: Term, occ: dict, cursor: dict) -> Term:
    if isinstance(m, Var):
        names = occ.get(m.name)
        if not names or len(names) == 1:
            return m
        i = cursor.get(m.name, 0)
        cursor[m.name] = i + 1
        return Var(names[i])
    if isinstance(m, App):
        return App(_linearize(m.fun, occ, cursor), _linearize(m.arg, occ, cursor))
    return Lam(m.var, _linearize(m.body, occ, cursor))


# --------------------------------------------------------------------------
# search

# Skeleton nodes, turned into a Derivation once the types are known:
#   ("ax", name, type) | ("lam", x, body, binder) | ("app", f, a) | ("and", nodes)
# binder: ("w", type) | ("one",) | ("mux", names)

def _skeleton_size(node) -> int:
    tag = node[0]
    if tag == "ax":
        return 1
    if tag == "lam":
        extra = 0 if node[3][0] == "one" else 1
        return 1 + extra + _skeleton_size(node[2])
    if tag == "app":
        return 1 + _skeleton_size(node[1]) + _skeleton_size(node[2])
    return 1 + sum(_skeleton_size(n) for n in node[1])


class _Search:
    def __init__(self, m: Term, bounds: SearchBounds, context: Context | None, stats: SearchStats):
        self.bounds = bounds
        self.stats = stats
        self.context = context
        taken = set(free_vars(m)) | (set(context) if context is not None else set())
        self.subject = _uniquify(m, set(taken))
        counts: dict[str, int] = {}
        _count(self.subject, counts)
        names = set(all_names(self.subject)) | taken
        self.occ: dict[str, list[str]] = {}
        for x, k in counts.items():
            if k >= 2:
                names_x = []
                for _ in range(k):
                    v = fresh_name(x, names)
                    names.add(v)
                    names_x.append(v)
                self.occ[x] = names_x
            else:
                self.occ[x] = [x] * k
        self.linear = _linearize(self.subject, {x: v for x, v in self.occ.items() if len(v) >= 2}, {})
        self.free = sorted(free_vars(self.subject))
        arity = max([2] + list(counts.values()))
        if context is not None:
            arity = max([arity] + [_max_arity(t) for t in context.values()])
        self.arity = arity
        self.counter = 0
        self.limit = 0
        self.best = None

    def fresh(self) -> TVar:
        self.counter += 1
        return TVar(f"?{self.counter}")

    def tick(self):
        self.stats.nodes_expanded += 1
        if self.stats.nodes_expanded > self.bounds.time_fuel:
            raise _OutOfFuel

    def too_big(self, node) -> bool:
        size = _skeleton_size(node)
        if size > self.bounds.max_proof_size:
            return True
        return self.best is not None and size > self.best[0][0]

    # typing of t at one shape; yields (subst, node, type, ctx)
    def gen(self, t: Term, shape, depth: int, s: dict):
        self.tick()
        if shape is not None:
            if depth + 1 > self.limit:
                return
            yield from self.copies(t, shape, 0, depth + 1, s, [], [], [])
            return
        if isinstance(t, Var):
            u = self.fresh()
            yield s, ("ax", t.name, u), u, {t.name: u}
            return
        if isinstance(t, Lam):
            x = t.var
            occ = self.occ.get(x, [])
            for s1, nb, tb, cb in self.gen(t.body, None, depth, s):
                if not occ:
                    tx = self.fresh()
                    binder = ("w", tx)
                    ctx = cb
                elif len(occ) == 1:
                    tx = cb[x]
                    binder = ("one",)
                    ctx = {k: v for k, v in cb.items() if k != x}
                else:
                    tx = Inter(tuple(cb[o] for o in occ))
                    binder = ("mux", occ)
                    ctx = {k: v for k, v in cb.items() if k not in occ}
                if element_count(tx) > self.bounds.max_type_elements:
                    continue
                node = ("lam", x, nb, binder)
                if self.too_big(node):
                    continue
                yield s1, node, Arrow(tx, tb), ctx
            return
        for s1, nf, tf, cf in self.gen(t.fun, None, depth, s):
            head = _walk(tf, s1)
            if isinstance(head, Arrow):
                choices = [_shape_of(head.dom)]
            elif _is_uvar(head):
                choices = _shapes(self.limit - depth, self.arity, self.bounds.max_type_elements)
            else:
                continue
            for shape in choices:
                for s2, na, ta, ca in self.gen(t.arg, shape, depth, s1):
                    node = ("app", nf, na)
                    if self.too_big(node):
                        continue
                    if isinstance(head, Arrow):
                        for s3 in _unify(head.dom, ta, s2, ordered=True):
                            yield s3, node, head.cod, {**cf, **ca}
                    else:
                        r = self.fresh()
                        s3 = _bind(head, Arrow(ta, r), s2)
                        if s3 is not None:
                            yield s3, node, r, {**cf, **ca}

    def copies(self, t, shape, i, depth, s, nodes, types, ctxs):
        if i == len(shape):
            ctx: dict[str, IType] = {}
            for k in ctxs[0]:
                ctx[k] = Inter(tuple(c[k] for c in ctxs))
            node = ("and", tuple(nodes))
            if not self.too_big(node):
                yield s, node, Inter(tuple(types)), ctx
            return
        for s1, n1, t1, c1 in self.gen(t, shape[i], depth, s):
            yield from self.copies(t, shape, i + 1, depth, s1, nodes + [n1], types + [t1],
                                   ctxs + [c1])

    def solutions(self):
        """Complete typings of the subject at the current degree limit."""
        for s, node, typ, ctx in self.gen(self.linear, None, 0, {}):
            root: dict[str, IType] = {}
            size = _skeleton_size(node)
            for v in self.free:
                occ = self.occ[v]
                if len(occ) >= 2:
                    root[v] = Inter(tuple(ctx[o] for o in occ))
                    size += 1
                else:
                    root[v] = ctx[v]
                if element_count(root[v]) > self.bounds.max_type_elements:
                    break
            else:
                if self.context is None:
                    yield s, node, typ, root, size
                    continue
                extra = [v for v in self.context if v not in root]
                size += sum(_intro_size(self.context[v]) for v in extra)
                yield from self.fit_context(s, node, typ, root, size)

    def fit_context(self, s, node, typ, root, size):
        names = list(root)

        def go(i, s):
            if i == len(names):
                yield s
                return
            v = names[i]
            for s1 in _unify(self.context[v], root[v], s):
                yield from go(i + 1, s1)

        for s1 in go(0, s):
            yield s1, node, typ, root, size

    def run(self) -> tuple[Derivation, int]:
        if self.context is not None:
            missing = set(self.free) - set(self.context)
            if missing:
                raise BoundsExhausted(f"context lacks free variables {sorted(missing)}", self.stats)
        try:
            for limit in range(self.bounds.max_degree + 1):
                self.limit = limit
                self.stats.degrees_tried.append(limit)
                self.best = None
                atom = TVar(DEFAULT_ATOM)
                for s, node, typ, root, size in self.solutions():
                    self.stats.solutions_seen += 1
                    final_type = _resolve(typ, s, atom)
                    key = (size, final_type.key,
                           tuple(sorted((v, _resolve(t, s, atom).key) for v, t in root.items())))
                    if self.best is None or key < self.best[0]:
                        self.best = (key, s, node, root)
                if self.best is not None:
                    _, s, node, root = self.best
                    return self.build(s, node), limit
        except _OutOfFuel:
            raise BoundsExhausted(
                f"search fuel of {self.bounds.time_fuel} nodes exhausted", self.stats) from None
        raise BoundsExhausted(
            f"no derivation with degree <= {self.bounds.max_degree} within the bounds", self.stats)

    def build(self, s: dict, node) -> Derivation:
        atom = TVar(DEFAULT_ATOM)

        def go(node) -> Derivation:
            tag = node[0]
            if tag == "ax":
                return ax(node[1], _resolve(node[2], s, atom))
            if tag == "lam":
                _, x, body, binder = node
                d = go(body)
                if binder[0] == "w":
                    d = weaken(d, x, _resolve(binder[1], s, atom))
                elif binder[0] == "mux":
                    d = mux(d, binder[1], x)
                return arrow_i(d, x)
            if tag == "app":
                return arrow_e(go(node[1]), go(node[2]))
            return and_n(go(n) for n in node[1])

        d = go(node)
        for v in self.free:
            if len(self.occ[v]) >= 2:
                d = mux(d, self.occ[v], v)
        if self.context is not None:
            taken = set(d.names) | set(self.context)
            for v, t in self.context.items():
                if v not in d.ctx:
                    d = introduce(d, v, t, taken)
        return d


def _intro_size(t: IType) -> int:
    """Nodes added by ``introduce`` for a binding of type t."""
    if isinstance(t, Inter):
        return 1 + sum(_intro_size(c) for c in t.children)
    return 1


def _max_arity(t: IType) -> int:
    if isinstance(t, Inter):
        return max([len(t.children)] + [_max_arity(c) for c in t.children])
    if isinstance(t, Arrow):
        return max(_max_arity(t.dom), _max_arity(t.cod))
    return 0


def search(m: Term, bounds: SearchBounds | None = None, context: Context | None = None,
           stats: SearchStats | None = None) -> tuple[Derivation, int, SearchStats]:
    """Run the search; returns (derivation, minimal degree, statistics)."""
    stats = stats if stats is not None else SearchStats()
    d, degree = _Search(m, bounds or SearchBounds(), context, stats).run()
    return d, degree, stats


def infer(m: Term, bounds: SearchBounds | None = None) -> Derivation:
    return search(m, bounds)[0]


def infer_minimal_depth(m: Term, bounds: SearchBounds | None = None) -> tuple[Derivation, int]:
    d, degree, _ = search(m, bounds)
    return d, degree


def infer_with_context(m: Term, context: Context | Mapping[str, IType],
                       bounds: SearchBounds | None = None) -> Derivation:
    """Like infer, but the conclusion context must be exactly ``context``."""
    ctx = context if isinstance(context, Context) else Context(context)
    return search(m, bounds, ctx)[0]

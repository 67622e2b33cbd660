"""Intersection types: commutative, but neither idempotent nor associative.

Linear types are type variables and arrows ``σ -> A``; an intersection
node has two or more children, which may themselves be intersections.
Equality identifies types up to permuting the children of each
intersection node and nothing else.
"""

from __future__ import annotations

import re
from collections.abc import Mapping
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

__all__ = [
    "IType", "TVar", "Arrow", "Inter", "is_linear", "element_count",
    "canonical_key", "canonicalize", "type_equal", "format_type", "parse_type",
    "type_to_json", "type_from_json", "type_vars", "subst_type_vars",
    "elements", "Context", "ContextOverlap", "ctx_intersect",
    "ctx_disjoint_union", "TypeSyntaxError",
]


class IType:
    __slots__ = ()

    @cached_property
    def key(self) -> tuple:
        return canonical_key(self)

    def __eq__(self, other):
        if not isinstance(other, IType):
            return NotImplemented
        return self is other or self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __str__(self):
        return format_type(self)


@dataclass(frozen=True, eq=False, repr=False)
class TVar(IType):
    name: str

    def __repr__(self):
        return f"TVar({self.name!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Arrow(IType):
    dom: IType
    cod: IType

    def __post_init__(self):
        if not is_linear(self.cod):
            raise TypeError(f"arrow codomain must be linear, got {self.cod}")

    def __repr__(self):
        return f"Arrow({self.dom!r}, {self.cod!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Inter(IType):
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise TypeError("an intersection needs at least two children")

    def __repr__(self):
        return f"Inter({list(self.children)!r})"


def is_linear(t: IType) -> bool:
    return isinstance(t, (TVar, Arrow))


def element_count(t: IType) -> int:
    """l(A) = 1; l(σ1 ∧ ... ∧ σn) = l(σ1) + ... + l(σn)."""
    if isinstance(t, Inter):
        return sum(element_count(c) for c in t.children)
    return 1


def elements(t: IType) -> list[IType]:
    """The linear leaves of t, left to right."""
    if isinstance(t, Inter):
        return [e for c in t.children for e in elements(c)]
    return [t]


def canonical_key(t: IType) -> tuple:
    # tag first, then children; intersection children sorted
    if isinstance(t, TVar):
        return (0, t.name)
    if isinstance(t, Arrow):
        return (1, canonical_key(t.dom), canonical_key(t.cod))
    return (2, tuple(sorted(canonical_key(c) for c in t.children)))


def canonicalize(t: IType) -> IType:
    if isinstance(t, TVar):
        return t
    if isinstance(t, Arrow):
        return Arrow(canonicalize(t.dom), canonicalize(t.cod))
    kids = sorted((canonicalize(c) for c in t.children), key=canonical_key)
    return Inter(tuple(kids))


def type_equal(s: IType, t: IType) -> bool:
    return canonical_key(s) == canonical_key(t)


def same_shape(s: IType, t: IType) -> bool:
    """Ordered structural identity (no permutation allowed)."""
    if isinstance(s, TVar) and isinstance(t, TVar):
        return s.name == t.name
    if isinstance(s, Arrow) and isinstance(t, Arrow):
        return same_shape(s.dom, t.dom) and same_shape(s.cod, t.cod)
    if isinstance(s, Inter) and isinstance(t, Inter):
        return len(s.children) == len(t.children) and all(
            same_shape(a, b) for a, b in zip(s.children, t.children))
    return False


def type_vars(t: IType) -> set[str]:
    if isinstance(t, TVar):
        return {t.name}
    if isinstance(t, Arrow):
        return type_vars(t.dom) | type_vars(t.cod)
    return set().union(*(type_vars(c) for c in t.children))


def subst_type_vars(t: IType, mapping: Mapping[str, IType]) -> IType:
    if isinstance(t, TVar):
        return mapping.get(t.name, t)
    if isinstance(t, Arrow):
        return Arrow(subst_type_vars(t.dom, mapping), subst_type_vars(t.cod, mapping))
    return Inter(tuple(subst_type_vars(c, mapping) for c in t.children))


# --------------------------------------------------------------------------
# concrete syntax

def format_type(t: IType, ascii: bool = False) -> str:
    conj = " /\\ " if ascii else " ∧ "
    if isinstance(t, TVar):
        return t.name
    if isinstance(t, Arrow):
        dom = format_type(t.dom, ascii)
        if isinstance(t.dom, Arrow):
            dom = f"({dom})"
        return f"{dom} -> {format_type(t.cod, ascii)}"
    parts = []
    for c in t.children:
        text = format_type(c, ascii)
        parts.append(f"({text})" if isinstance(c, Arrow) else text)
    return "(" + conj.join(parts) + ")"


class TypeSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TYPE_TOKEN = re.compile(r"\s*(?:(?P<ident>[a-zA-Z][a-zA-Z0-9_']*)|(?P<sym>->|→|∧|/\\|\(|\)))")


def _type_tokens(text: str):
    out = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TYPE_TOKEN.match(text, pos)
        if m is None:
            raise TypeSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = "ident" if m.group("ident") else "sym"
        v = m.group(kind)
        v = {"→": "->", "/\\": "∧"}.get(v, v)
        out.append((kind, v, m.start(kind)))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


def parse_type(text: str) -> IType:
    """Parse ``a``, ``σ -> A`` (right-assoc) and ``(σ1 ∧ ... ∧ σn)``; ``/\\`` and ``→`` accepted."""
    toks = _type_tokens(text)
    i = 0

    def peek():
        return toks[i]

    def advance():
        nonlocal i
        i += 1
        return toks[i - 1]

    def full():
        start = peek()[2]
        left = atom()
        if peek()[1] == "->":
            advance()
            right = full()
            if not is_linear(right):
                raise TypeSyntaxError("arrow codomain must be linear", start)
            return Arrow(left, right)
        return left

    def atom():
        kind, v, pos = advance()
        if kind == "ident":
            return TVar(v)
        if v == "(":
            parts = [full()]
            while peek()[1] == "∧":
                advance()
                parts.append(full())
            kind2, v2, pos2 = advance()
            if v2 != ")":
                raise TypeSyntaxError("expected ')'", pos2)
            return parts[0] if len(parts) == 1 else Inter(tuple(parts))
        raise TypeSyntaxError(f"unexpected {v or 'end of input'!r}", pos)

    t = full()
    kind, v, pos = peek()
    if kind != "eof":
        raise TypeSyntaxError(f"unexpected {v!r}", pos)
    return t


def type_to_json(t: IType):
    if isinstance(t, TVar):
        return {"var": t.name}
    if isinstance(t, Arrow):
        return {"arrow": [type_to_json(t.dom), type_to_json(t.cod)]}
    return {"inter": [type_to_json(c) for c in t.children]}


def type_from_json(doc) -> IType:
    if not isinstance(doc, dict) or len(doc) != 1:
        raise ValueError(f"malformed type: {doc!r}")
    (tag, val), = doc.items()
    if tag == "var" and isinstance(val, str):
        return TVar(val)
    if tag == "arrow" and isinstance(val, list) and len(val) == 2:
        dom, cod = (type_from_json(v) for v in val)
        if not is_linear(cod):
            raise ValueError("arrow codomain must be linear")
        return Arrow(dom, cod)
    if tag == "inter" and isinstance(val, list):
        if len(val) < 2:
            raise ValueError("intersection needs at least two children")
        return Inter(tuple(type_from_json(v) for v in val))
    raise ValueError(f"malformed type: {doc!r}")


# --------------------------------------------------------------------------
# contexts

class ContextOverlap(ValueError):
    def __init__(self, names: Iterable[str]):
        self.names = sorted(names)
        super().__init__(f"contexts are not disjoint (Γ # Δ fails on {', '.join(self.names)})")


class Context(Mapping):
    """Immutable finite map from variable names to intersection types."""

    __slots__ = ("_items", "_hash")

    def __init__(self, bindings=()):
        items = dict(bindings.items() if isinstance(bindings, Mapping) else bindings)
        for name, t in items.items():
            if not isinstance(t, IType):
                raise TypeError(f"binding for {name!r} is not a type")
        self._items = items
        self._hash = None

    def __getitem__(self, name):
        return self._items[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def __eq__(self, other):
        if not isinstance(other, Context):
            return NotImplemented
        return self._items == other._items

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._items.items()))
        return self._hash

    def __repr__(self):
        return f"Context({self._items!r})"

    def __str__(self):
        return ", ".join(f"{x}: {format_type(t)}" for x, t in self._items.items())

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(self._items)

    def extend(self, name: str, t: IType) -> "Context":
        if name in self._items:
            raise ContextOverlap([name])
        items = dict(self._items)
        items[name] = t
        return Context(items)

    def remove(self, *names: str) -> "Context":
        return Context({k: v for k, v in self._items.items() if k not in names})

    def rename(self, old: str, new: str) -> "Context":
        if new in self._items and new != old:
            raise ContextOverlap([new])
        return Context({(new if k == old else k): v for k, v in self._items.items()})

    def restrict(self, names: Iterable[str]) -> "Context":
        names = set(names)
        return Context({k: v for k, v in self._items.items() if k in names})


def ctx_intersect(gs: list[Context]) -> Context:
    """Merge contexts; a variable bound in k >= 2 of them gets one flat k-ary intersection."""
    collected: dict[str, list[IType]] = {}
    for g in gs:
        for name, t in g.items():
            collected.setdefault(name, []).append(t)
    return Context({name: ts[0] if len(ts) == 1 else Inter(tuple(ts))
                    for name, ts in collected.items()})


def ctx_disjoint_union(g: Context, d: Context) -> Context:
    overlap = g.domain & d.domain
    if overlap:
        raise ContextOverlap(overlap)
    return Context({**dict(g.items()), **dict(d.items())})

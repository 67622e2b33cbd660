"""Untyped lambda terms: syntax, parsing, substitution and beta-reduction.

Terms use named variables.  Equality and hashing go through an
alpha-canonical (de Bruijn style) key, so ``Term.__eq__`` is
alpha-equivalence while the surface names are preserved for printing
and for the free-variable bookkeeping done by typing derivations.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Collection, Iterable, Iterator

__all__ = [
    "Term", "Var", "Lam", "App", "ParseError", "FuelExhausted", "RedexError",
    "Strategy", "BODY", "FUN", "ARG", "parse_term", "format_term",
    "term_size", "free_vars", "all_names", "alpha_equal", "fresh_name",
    "substitute", "rename_instance", "renaming_witness", "is_instance",
    "redexes", "subterm_at", "replace_at", "reduce_at", "is_normal",
    "normalize", "max_reduction_length", "ReductionGraph", "explore",
    "DEFAULT_FUEL",
]

DEFAULT_FUEL = 10_000

# Steps of a redex position.
BODY = "body"
FUN = "fun"
ARG = "arg"


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class FuelExhausted(RuntimeError):
    """Reduction or exploration ran past its step budget."""

    def __init__(self, message: str, partial: list | None = None):
        super().__init__(message)
        self.partial = partial or []


class RedexError(ValueError):
    pass


class Term:
    """Base class of the three term constructors."""

    __slots__ = ()

    @cached_property
    def key(self) -> tuple:
        return _alpha_key(self, ())

    def __eq__(self, other):
        if not isinstance(other, Term):
            return NotImplemented
        return self is other or self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True, eq=False, repr=False)
class Var(Term):
    name: str

    def __repr__(self):
        return f"Var({self.name!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Lam(Term):
    var: str
    body: Term

    def __repr__(self):
        return f"Lam({self.var!r}, {self.body!r})"


@dataclass(frozen=True, eq=False, repr=False)
class App(Term):
    fun: Term
    arg: Term

    def __repr__(self):
        return f"App({self.fun!r}, {self.arg!r})"


def _alpha_key(t: Term, env: tuple) -> tuple:
    # env holds binder names, innermost first
    if isinstance(t, Var):
        try:
            return ("b", env.index(t.name))
        except ValueError:
            return ("f", t.name)
    if isinstance(t, Lam):
        return ("l", _alpha_key(t.body, (t.var,) + env))
    return ("a", _alpha_key(t.fun, env), _alpha_key(t.arg, env))


def alpha_equal(m: Term, n: Term) -> bool:
    return m.key == n.key


# --------------------------------------------------------------------------
# parsing and printing

_TOKEN = re.compile(r"\s*(?:(?P<ident>[a-zA-Z][a-zA-Z0-9_']*)|(?P<sym>\\|λ|\.|\(|\)))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = "ident" if m.group("ident") else "sym"
        value = m.group(kind)
        tokens.append((kind, value, m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, pos = self.advance()
        if v != value or kind == "eof":
            found = "end of input" if kind == "eof" else repr(v)
            raise ParseError(f"expected {value!r}, found {found}", pos)

    def term(self) -> Term:
        kind, v, _ = self.peek()
        if kind == "sym" and v in ("\\", "λ"):
            return self.lam()
        return self.app()

    def lam(self) -> Term:
        self.advance()
        names = []
        while self.peek()[0] == "ident":
            names.append(self.advance()[1])
        if not names:
            raise ParseError("expected a binder", self.peek()[2])
        self.expect(".")
        body = self.term()
        for name in reversed(names):
            body = Lam(name, body)
        return body

    def app(self) -> Term:
        result = None
        while True:
            kind, v, pos = self.peek()
            if kind == "ident":
                self.advance()
                atom = Var(v)
            elif kind == "sym" and v == "(":
                self.advance()
                atom = self.term()
                self.expect(")")
            elif kind == "sym" and v in ("\\", "λ") and result is not None:
                # a trailing abstraction extends to the right
                atom = self.lam()
            else:
                break
            result = atom if result is None else App(result, atom)
        if result is None:
            kind, v, pos = self.peek()
            found = "end of input" if kind == "eof" else repr(v)
            raise ParseError(f"expected a term, found {found}", pos)
        return result


def parse_term(text: str) -> Term:
    """Parse the surface syntax (``\\x. M`` or ``λx. M``, left-assoc application)."""
    p = _Parser(text)
    t = p.term()
    kind, v, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"unexpected {v!r}", pos)
    return t


def format_term(t: Term, ascii: bool = False) -> str:
    lam = "\\" if ascii else "λ"

    def go(t: Term) -> str:
        if isinstance(t, Var):
            return t.name
        if isinstance(t, Lam):
            return f"{lam}{t.var}. {go(t.body)}"
        f = go(t.fun)
        if isinstance(t.fun, Lam):
            f = f"({f})"
        a = go(t.arg)
        if not isinstance(t.arg, Var):
            a = f"({a})"
        return f"{f} {a}"

    return go(t)


# --------------------------------------------------------------------------
# basic measures and names

def term_size(m: Term) -> int:
    """|x| = 1, |λx.M| = |M| + 1, |MN| = |M| + |N| + 1."""
    if isinstance(m, Var):
        return 1
    if isinstance(m, Lam):
        return term_size(m.body) + 1
    return term_size(m.fun) + term_size(m.arg) + 1


def free_vars(m: Term) -> frozenset[str]:
    cached = m.__dict__.get("_fv")
    if cached is not None:
        return cached
    if isinstance(m, Var):
        fv = frozenset((m.name,))
    elif isinstance(m, Lam):
        fv = free_vars(m.body) - {m.var}
    else:
        fv = free_vars(m.fun) | free_vars(m.arg)
    m.__dict__["_fv"] = fv
    return fv


def all_names(m: Term) -> frozenset[str]:
    """Every variable name occurring in m, free or bound."""
    if isinstance(m, Var):
        return frozenset((m.name,))
    if isinstance(m, Lam):
        return all_names(m.body) | {m.var}
    return all_names(m.fun) | all_names(m.arg)


_SUFFIX = re.compile(r"[0-9']+$")


def fresh_name(base: str, avoid: Collection[str]) -> str:
    """Smallest ``stem + k`` (k >= 1) not in avoid, where stem drops numeric/prime suffixes."""
    stem = _SUFFIX.sub("", base) or base
    k = 1
    while f"{stem}{k}" in avoid:
        k += 1
    return f"{stem}{k}"


# --------------------------------------------------------------------------
# substitution and instances

def substitute(m: Term, x: str, n: Term) -> Term:
    """Capture-avoiding m[n/x]."""
    if x not in free_vars(m):
        return m
    if isinstance(m, Var):
        return n
    if isinstance(m, App):
        return App(substitute(m.fun, x, n), substitute(m.arg, x, n))
    y, body = m.var, m.body
    if y in free_vars(n):
        y2 = fresh_name(y, free_vars(n) | all_names(body) | {x})
        body = substitute(body, y, Var(y2))
        y = y2
    return Lam(y, substitute(body, x, n))


def rename_instance(m: Term, targets: Iterable[str], fresh: str) -> Term:
    """Rename the free variables in targets to the single name fresh."""
    targets = set(targets)
    if not targets:
        return m
    if fresh in free_vars(m) and targets != {fresh}:
        raise ValueError(f"{fresh!r} is already free in {format_term(m)}")
    missing = targets - free_vars(m)
    if missing:
        raise ValueError(f"not free in {format_term(m)}: {sorted(missing)}")
    for t in sorted(targets):
        if t != fresh:
            m = substitute(m, t, Var(fresh))
    return m


def renaming_witness(general: Term, specific: Term) -> dict[str, str] | None:
    """Map f on free variables of general with general[f] alpha-equal to specific, or None."""
    mapping: dict[str, str] = {}

    def go(g: Term, s: Term, genv: tuple, senv: tuple) -> bool:
        if isinstance(g, Var) and isinstance(s, Var):
            gi = genv.index(g.name) if g.name in genv else None
            si = senv.index(s.name) if s.name in senv else None
            if gi is not None or si is not None:
                return gi == si
            prev = mapping.setdefault(g.name, s.name)
            return prev == s.name
        if isinstance(g, Lam) and isinstance(s, Lam):
            return go(g.body, s.body, (g.var,) + genv, (s.var,) + senv)
        if isinstance(g, App) and isinstance(s, App):
            return go(g.fun, s.fun, genv, senv) and go(g.arg, s.arg, genv, senv)
        return False

    return mapping if go(general, specific, (), ()) else None


def is_instance(m: Term, n: Term) -> bool:
    """True iff m is n with some subset of its free variables renamed to one fresh name."""
    w = renaming_witness(n, m)
    if w is None:
        return False
    moved = {u: v for u, v in w.items() if u != v}
    if not moved:
        return True
    targets = set(moved.values())
    if len(targets) != 1:
        return False
    (fresh,) = targets
    return fresh not in free_vars(n)


# --------------------------------------------------------------------------
# redexes and reduction

def _is_redex(t: Term) -> bool:
    return isinstance(t, App) and isinstance(t.fun, Lam)


def redexes(m: Term) -> list[tuple[str, ...]]:
    """All redex positions, leftmost-outermost first."""
    out: list[tuple[str, ...]] = []

    def go(t: Term, path: tuple[str, ...]):
        if _is_redex(t):
            out.append(path)
        if isinstance(t, Lam):
            go(t.body, path + (BODY,))
        elif isinstance(t, App):
            go(t.fun, path + (FUN,))
            go(t.arg, path + (ARG,))

    go(m, ())
    return out


def is_normal(m: Term) -> bool:
    if _is_redex(m):
        return False
    if isinstance(m, Lam):
        return is_normal(m.body)
    if isinstance(m, App):
        return is_normal(m.fun) and is_normal(m.arg)
    return True


def subterm_at(m: Term, path: Iterable[str]) -> Term:
    for step in path:
        if step == BODY and isinstance(m, Lam):
            m = m.body
        elif step == FUN and isinstance(m, App):
            m = m.fun
        elif step == ARG and isinstance(m, App):
            m = m.arg
        else:
            raise RedexError(f"invalid position step {step!r}")
    return m


def replace_at(m: Term, path: tuple[str, ...], new: Term) -> Term:
    if not path:
        return new
    step, rest = path[0], path[1:]
    if step == BODY and isinstance(m, Lam):
        return Lam(m.var, replace_at(m.body, rest, new))
    if step == FUN and isinstance(m, App):
        return App(replace_at(m.fun, rest, new), m.arg)
    if step == ARG and isinstance(m, App):
        return App(m.fun, replace_at(m.arg, rest, new))
    raise RedexError(f"invalid position step {step!r}")


def contract(redex: Term) -> Term:
    if not _is_redex(redex):
        raise RedexError(f"not a redex: {format_term(redex)}")
    return substitute(redex.fun.body, redex.fun.var, redex.arg)


def reduce_at(m: Term, path: Iterable[str]) -> Term:
    path = tuple(path)
    return replace_at(m, path, contract(subterm_at(m, path)))


class Strategy(str, enum.Enum):
    LEFTMOST_OUTERMOST = "lo"
    RIGHTMOST_INNERMOST = "ri"

    @classmethod
    def parse(cls, s: "str | Strategy") -> "Strategy":
        if isinstance(s, Strategy):
            return s
        aliases = {"leftmost-outermost": "lo", "rightmost-innermost": "ri"}
        return cls(aliases.get(s, s))


def pick_redex(m: Term, strategy: Strategy | str) -> tuple[str, ...] | None:
    strategy = Strategy.parse(strategy)
    if strategy is Strategy.LEFTMOST_OUTERMOST:
        rs = redexes(m)
        return rs[0] if rs else None

    # right-to-left post-order: first hit is the rightmost innermost redex
    def go(t: Term, path):
        if isinstance(t, Lam):
            found = go(t.body, path + (BODY,))
            if found is not None:
                return found
        elif isinstance(t, App):
            found = go(t.arg, path + (ARG,))
            if found is None:
                found = go(t.fun, path + (FUN,))
            if found is not None:
                return found
            if _is_redex(t):
                return path
        return None

    return go(m, ())


def normalize(m: Term, strategy: Strategy | str = Strategy.LEFTMOST_OUTERMOST,
              fuel: int = DEFAULT_FUEL) -> list[Term]:
    """Reduction sequence from m to its normal form (m included)."""
    seq = [m]
    while True:
        p = pick_redex(seq[-1], strategy)
        if p is None:
            return seq
        if len(seq) > fuel:
            raise FuelExhausted(f"no normal form within {fuel} steps", seq)
        seq.append(reduce_at(seq[-1], p))


# --------------------------------------------------------------------------
# exhaustive reduction graph

@dataclass
class ReductionGraph:
    """Reachable part of the beta-reduction graph, nodes keyed up to alpha."""
    root: Term
    terms: dict            # key -> representative term
    edges: dict            # key -> list of (path, key)
    longest: dict          # key -> longest reduction length from that node

    @property
    def longest_reduction(self) -> int:
        return self.longest[self.root.key]

    def normal_forms(self) -> list[Term]:
        return [self.terms[k] for k, out in self.edges.items() if not out]

    def __len__(self):
        return len(self.terms)


def explore(m: Term, fuel: int = DEFAULT_FUEL) -> ReductionGraph:
    """Memoized depth-first walk of every reduction from m.

    Raises FuelExhausted when more than ``fuel`` distinct terms are reached,
    when some path is longer than ``fuel``, or when a cycle shows that m is
    not strongly normalizing.
    """
    terms: dict = {}
    edges: dict = {}
    longest: dict = {}
    on_stack: set = set()

    def visit_children(k):
        t = terms[k]
        out = []
        for p in redexes(t):
            child = reduce_at(t, p)
            out.append((p, child.key))
            terms.setdefault(child.key, child)
        edges[k] = out
        return out

    root = m.key
    terms[root] = m
    stack: list[tuple] = [(root, None)]
    while stack:
        k, it = stack[-1]
        if it is None:
            if len(terms) > fuel:
                raise FuelExhausted(f"reduction graph exceeds {fuel} terms")
            on_stack.add(k)
            it = iter(visit_children(k))
            stack[-1] = (k, it)
        advanced = False
        for _, ck in it:
            if ck in longest:
                continue
            if ck in on_stack:
                raise FuelExhausted("reduction cycle: term is not strongly normalizing")
            if len(stack) > fuel:
                raise FuelExhausted(f"reduction path longer than {fuel}")
            stack.append((ck, None))
            advanced = True
            break
        if advanced:
            continue
        stack.pop()
        on_stack.discard(k)
        longest[k] = max((longest[ck] + 1 for _, ck in edges[k]), default=0)
    return ReductionGraph(m, terms, edges, longest)


def max_reduction_length(m: Term, fuel: int = DEFAULT_FUEL) -> int:
    return explore(m, fuel).longest_reduction


def iter_subterms(m: Term) -> Iterator[Term]:
    yield m
    if isinstance(m, Lam):
        yield from iter_subterms(m.body)
    elif isinstance(m, App):
        yield from iter_subterms(m.fun)
        yield from iter_subterms(m.arg)

"""Corpus generation and end-to-end checks of the quantitative claims.

Everything here is deterministic for a fixed seed: term generation uses a
private ``random.Random`` and all iteration orders are fixed.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .derivation import (Derivation, Rule, check_derivation, decompose_intersection_tree,
                         derivation_key, iter_nodes, peel_delta, rename_free_var)
from .inference import BoundsExhausted, SearchBounds, search
from .itypes import Inter
from .measures import degree, proof_size, rank, weight
from .terms import (App, DEFAULT_FUEL, FuelExhausted, Lam, Term, Var, explore, format_term,
                    fresh_name, redexes, term_size)
from .transform import (TransformError, commute_delta, reduce_subject, subst_derivation)

__all__ = [
    "simply_typable", "gen_sn_terms", "BoundReport", "verify_bounds", "check_lemma3m",
    "MonotonicityReport", "check_weight_monotonicity", "intersection_tree_violations",
    "SubstitutionCheck", "check_weighted_substitution", "substitution_pairs",
    "remark_term", "RemarkRow", "remark_family_report", "format_remark_table",
    "CorpusItem", "CorpusReport",
    "run_corpus",
]


# --------------------------------------------------------------------------
# simple types, used only to filter generated terms

def _st_walk(t, s):
    while isinstance(t, int) and t in s:
        t = s[t]
    return t


def _st_occurs(v, t, s):
    t = _st_walk(t, s)
    if isinstance(t, int):
        return t == v
    return _st_occurs(v, t[0], s) or _st_occurs(v, t[1], s)


def _st_unify(a, b, s) -> bool:
    a, b = _st_walk(a, s), _st_walk(b, s)
    if isinstance(a, int) and a == b:
        return True
    if isinstance(a, int) or isinstance(b, int):
        v, t = (a, b) if isinstance(a, int) else (b, a)
        if _st_occurs(v, t, s):
            return False
        s[v] = t
        return True
    return _st_unify(a[0], b[0], s) and _st_unify(a[1], b[1], s)


def simply_typable(m: Term) -> bool:
    """Curry-style simple typability (type variables are ints, arrows are pairs)."""
    s: dict = {}
    counter = iter(range(1 << 30))
    free: dict = {}

    def go(t, env):
        if isinstance(t, Var):
            if t.name in env:
                return env[t.name]
            return free.setdefault(t.name, next(counter))
        if isinstance(t, Lam):
            a = next(counter)
            body = go(t.body, {**env, t.var: a})
            return None if body is None else (a, body)
        f = go(t.fun, env)
        x = None if f is None else go(t.arg, env)
        if x is None:
            return None
        r = next(counter)
        return r if _st_unify(f, (x, r), s) else None

    return go(m, {}) is not None


_BINDERS = "xyzuvw"


def _random_term(rng: random.Random, size: int, scope: list[str]) -> Term | None:
    if size == 1:
        return Var(rng.choice(scope)) if scope else None
    if size == 2 or rng.random() < 0.5:
        depth = len(scope)
        name = _BINDERS[depth % len(_BINDERS)] + ("" if depth < len(_BINDERS) else str(depth))
        body = _random_term(rng, size - 1, scope + [name])
        return None if body is None else Lam(name, body)
    left = rng.randint(1, size - 2)
    f = _random_term(rng, left, scope)
    if f is None:
        return None
    a = _random_term(rng, size - 1 - left, scope)
    return None if a is None else App(f, a)


def gen_sn_terms(seed: int, count: int, max_size: int, max_attempts: int | None = None) -> list[Term]:
    """Distinct (up to α) closed simply typable terms of size <= max_size.

    Terms are sampled at a uniformly chosen size and kept when simply
    typable, which makes them strongly normalizing.  Fewer than count terms
    come back only when the space is exhausted within max_attempts.
    """
    if max_size < 2 or count <= 0:
        return []
    rng = random.Random(seed)
    attempts = max_attempts if max_attempts is not None else 2000 * count
    seen: set = set()
    out: list[Term] = []
    for _ in range(attempts):
        if len(out) >= count:
            break
        size = rng.randint(2, max_size)
        t = _random_term(rng, size, [])
        if t is None or t.key in seen:
            continue
        if simply_typable(t):
            seen.add(t.key)
            out.append(t)
    return out


# --------------------------------------------------------------------------
# bounds of the main theorem

@dataclass
class BoundReport:
    term: Term
    subject_size: int
    degree: int
    rank: int
    theorem_bound: int
    longest_reduction: int
    max_normal_form_size: int
    weight_ceiling: int
    normal_forms: int
    verdicts: dict

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())

    def to_json(self) -> dict:
        return {
            "term": format_term(self.term),
            "subject_size": self.subject_size,
            "degree": self.degree,
            "rank": self.rank,
            "theorem_bound": self.theorem_bound,
            "longest_reduction": self.longest_reduction,
            "max_normal_form_size": self.max_normal_form_size,
            "weight_ceiling": self.weight_ceiling,
            "normal_forms": self.normal_forms,
            "verdicts": dict(self.verdicts),
            "ok": self.ok,
        }

    def to_text(self) -> str:
        lines = [f"{'term':<25} {format_term(self.term)}"]
        for k in ("subject_size", "degree", "rank", "theorem_bound", "longest_reduction",
                  "max_normal_form_size", "weight_ceiling"):
            lines.append(f"{k:<25} {getattr(self, k)}")
        for k, v in self.verdicts.items():
            lines.append(f"{k:<25} {'pass' if v else 'FAIL'}")
        return "\n".join(lines)


def verify_bounds(m: Term, pi: Derivation, fuel: int = DEFAULT_FUEL) -> BoundReport:
    """Compare the oracle's longest reduction and normal forms with the bounds.

    A normal form reached in zero steps is m itself; for it the size bound
    is checked non-strictly, since |M| < |M|^1 cannot hold when D = 0.
    """
    if pi.term != m:
        raise ValueError("derivation subject differs from the term")
    graph = explore(m, fuel)
    size = term_size(m)
    d = degree(pi)
    rk = rank(pi)
    bound = size ** (d + 1)
    ceiling = weight(pi, rk)
    nfs = graph.normal_forms()
    nf_sizes = [term_size(t) for t in nfs]
    nf_ok = all(
        (s <= bound) if t.key == m.key else (s < bound) for t, s in zip(nfs, nf_sizes))
    longest = graph.longest_reduction
    verdicts = {
        "steps_below_bound": longest < bound,
        "normal_forms_below_bound": nf_ok,
        "steps_below_weight": longest < ceiling,
        "weight_chain": ceiling <= rk ** d * size <= bound,
    }
    return BoundReport(m, size, d, rk, bound, longest, max(nf_sizes), ceiling, len(nfs), verdicts)


def check_lemma3m(pi: Derivation, r_range: Iterable[int] = range(1, 9)) -> dict:
    size = term_size(pi.term)
    d = degree(pi)
    w1 = weight(pi, 1)
    return {
        "rank_le_subject_size": rank(pi) <= size,
        "subject_size_le_proof_size": size <= proof_size(pi),
        "weight_scaling": all(weight(pi, r) <= r ** d * w1 for r in r_range),
        "weight_one_is_subject_size": w1 == size,
    }


# --------------------------------------------------------------------------
# weight decrease along every transported reduction

@dataclass
class MonotonicityReport:
    derivations: int = 0
    edges: int = 0
    violations: list = field(default_factory=list)
    rank_increases: int = 0
    degree_increases: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations and self.rank_increases == 0

    def to_json(self) -> dict:
        return {"derivations": self.derivations, "edges": self.edges,
                "violations": list(self.violations), "rank_increases": self.rank_increases,
                "degree_increases": self.degree_increases, "ok": self.ok}


def check_weight_monotonicity(pi: Derivation, fuel: int = DEFAULT_FUEL,
                              extra_r: int = 3) -> MonotonicityReport:
    """Transport every redex of every reachable derivation; weights must drop.

    For an edge from Π the weight must strictly decrease at each r in
    rank(Π) .. rank(Π) + extra_r.  Transformation failures are recorded as
    violations too.
    """
    report = MonotonicityReport()
    seen = {derivation_key(pi)}
    queue = deque([pi])
    while queue:
        cur = queue.popleft()
        report.derivations += 1
        if report.derivations > fuel:
            raise FuelExhausted(f"more than {fuel} derivations reachable")
        rk, dg = rank(cur), degree(cur)
        for p in redexes(cur.term):
            report.edges += 1
            where = f"{format_term(cur.term)} @ {list(p)}"
            try:
                step = reduce_subject(cur, p)
            except TransformError as e:
                report.violations.append(f"{where}: {e}")
                continue
            nxt = step.after
            for r in range(rk, rk + extra_r + 1):
                before, after = weight(cur, r), weight(nxt, r)
                if not after < before:
                    report.violations.append(f"{where}: W at r={r} went {before} -> {after}")
            if rank(nxt) > rk:
                report.rank_increases += 1
            if degree(nxt) > dg:
                report.degree_increases += 1
            k = derivation_key(nxt)
            if k not in seen:
                seen.add(k)
                queue.append(nxt)
    return report


def intersection_tree_violations(pi: Derivation) -> list[str]:
    """Nodes with an intersection type whose intersection tree is not a proper one."""
    out = []
    for path, node in iter_nodes(pi):
        if isinstance(node.type, Inter):
            tree = decompose_intersection_tree(node)
            if tree.is_empty or len(tree.leaves()) < 2:
                out.append(f"node {list(path)}: {node.conclusion}")
    return out


# --------------------------------------------------------------------------
# weighted substitution

@dataclass
class SubstitutionCheck:
    sigma: Derivation
    pi: Derivation
    var: str
    result: Derivation | None
    verdicts: dict
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None and all(self.verdicts.values())


def check_weighted_substitution(sigma: Derivation, pi: Derivation, x: str) -> SubstitutionCheck:
    try:
        result = subst_derivation(sigma, pi, x)
    except TransformError as e:
        return SubstitutionCheck(sigma, pi, x, None, {}, str(e))
    r0 = max(rank(pi), rank(sigma))
    verdicts = {"checked": check_derivation(result).ok}
    for r in (r0, r0 + 1):
        verdicts[f"weight_r{r}"] = weight(result, r) <= weight(pi, r) + weight(sigma, r)
    return SubstitutionCheck(sigma, pi, x, result, verdicts)


def _redex_pairs(pi: Derivation) -> list[tuple[Derivation, Derivation, str]]:
    """(Σ, Π, x) at every typed redex occurrence: argument, abstraction body, binder."""
    out = []
    for _, node in iter_nodes(pi):
        if node.rule is not Rule.ARROW_E:
            continue
        core, _ = peel_delta(node.premises[0])
        if core.rule is not Rule.ARROW_I:
            continue
        leaf = commute_delta(node)
        core, _ = peel_delta(leaf)
        lam, arg = core.premises
        out.append((arg, lam.premises[0], lam.var))
    return out


def substitution_pairs(derivations: list[Derivation], count: int, seed: int = 0
                       ) -> list[tuple[Derivation, Derivation, str]]:
    """Compatible (Σ, Π, x) triples: redex sites first, then random pairings.

    Random pairings pick a sub-derivation Π and a context variable x of
    it, then any sub-derivation Σ proving x's type, with Σ's context
    renamed apart from Π's.
    """
    rng = random.Random(seed)
    pairs: list = []
    for d in derivations:
        pairs.extend(_redex_pairs(d))
    rng.shuffle(pairs)
    pairs = pairs[: count // 2]

    pool: list[Derivation] = []
    seen = set()
    for d in derivations:
        for _, node in iter_nodes(d):
            k = derivation_key(node)
            if k not in seen:
                seen.add(k)
                pool.append(node)
    by_type: dict = {}
    for node in pool:
        by_type.setdefault(node.type.key, []).append(node)
    hosts = [n for n in pool if len(n.ctx)]
    tries = 0
    while len(pairs) < count and hosts and tries < 50 * count:
        tries += 1
        pi = rng.choice(hosts)
        x = rng.choice(sorted(pi.ctx))
        cands = by_type.get(pi.ctx[x].key)
        if not cands:
            continue
        sigma = rng.choice(cands)
        taken = set(pi.names) | set(sigma.names)
        for v in sorted(sigma.ctx):
            if v in pi.ctx:
                new = fresh_name(v, taken)
                taken.add(new)
                sigma = rename_free_var(sigma, v, new)
        pairs.append((sigma, pi, x))
    return pairs


# --------------------------------------------------------------------------
# the (λx y. y x ... x)(I I) family

def remark_term(n: int) -> Term:
    if n < 1:
        raise ValueError("n must be at least 1")
    body: Term = Var("y")
    for _ in range(n):
        body = App(body, Var("x"))
    ident = Lam("z", Var("z"))
    return App(Lam("x", Lam("y", body)), App(ident, ident))


@dataclass
class RemarkRow:
    n: int
    term: Term
    subject_size: int
    longest_reduction: int
    degree: int
    rank: int
    theorem_bound: int
    verdicts: dict
    claimed_size: int
    claimed_reductions: int
    claimed_bound: int

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())

    def to_json(self) -> dict:
        return {
            "n": self.n, "term": format_term(self.term), "subject_size": self.subject_size,
            "longest_reduction": self.longest_reduction, "degree": self.degree,
            "rank": self.rank, "theorem_bound": self.theorem_bound,
            "verdicts": dict(self.verdicts), "ok": self.ok,
            "claimed": {"subject_size": self.claimed_size,
                        "reductions": self.claimed_reductions,
                        "bound": self.claimed_bound},
        }


def remark_family_report(n_max: int, bounds: SearchBounds | None = None,
                         fuel: int = DEFAULT_FUEL) -> list[RemarkRow]:
    """One row per n; the claimed columns are reported, never checked."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    rows = []
    for n in range(1, n_max + 1):
        m = remark_term(n)
        pi, d, _ = search(m, bounds)
        rep = verify_bounds(m, pi, fuel)
        rows.append(RemarkRow(n, m, rep.subject_size, rep.longest_reduction, d, rank(pi),
                              rep.theorem_bound, rep.verdicts,
                              2 * n + 6, 2 * n + 1, 2 * n + 6))
    return rows


def format_remark_table(rows: list[RemarkRow]) -> str:
    head = ("n", "|M|", "longest", "degree", "rank", "bound", "verdict",
            "claimed |M|", "claimed steps", "claimed bound")
    body = [(str(r.n), str(r.subject_size), str(r.longest_reduction), str(r.degree),
             str(r.rank), str(r.theorem_bound), "pass" if r.ok else "FAIL",
             str(r.claimed_size), str(r.claimed_reductions), str(r.claimed_bound)) for r in rows]
    widths = [max(len(h), *(len(b[i]) for b in body)) for i, h in enumerate(head)]
    fmt = lambda cells: "  ".join(c.rjust(w) for c, w in zip(cells, widths))
    return "\n".join([fmt(head)] + [fmt(b) for b in body]
                     + ["(claimed columns are informational only)"])


# --------------------------------------------------------------------------
# whole-corpus pipeline

@dataclass
class CorpusItem:
    term: Term
    derivation: Derivation | None
    degree: int | None
    checked: bool
    lemma3m: dict
    bounds: BoundReport | None
    monotonicity: MonotonicityReport | None
    tree_violations: list
    error: str | None = None

    @property
    def ok(self) -> bool:
        return (self.error is None and self.checked and all(self.lemma3m.values())
                and self.bounds is not None and self.bounds.ok
                and (self.monotonicity is None or self.monotonicity.ok)
                and not self.tree_violations)

    def to_json(self) -> dict:
        return {
            "term": format_term(self.term),
            "degree": self.degree,
            "checked": self.checked,
            "lemma3m": dict(self.lemma3m),
            "bounds": None if self.bounds is None else self.bounds.to_json(),
            "monotonicity": None if self.monotonicity is None else self.monotonicity.to_json(),
            "tree_violations": list(self.tree_violations),
            "error": self.error,
            "ok": self.ok,
        }


@dataclass
class CorpusReport:
    items: list
    substitution: list

    @property
    def failures(self) -> list:
        return [i for i in self.items if not i.ok]

    @property
    def substitution_failures(self) -> list:
        return [c for c in self.substitution if not c.ok]

    @property
    def ok(self) -> bool:
        return not self.failures and not self.substitution_failures

    def summary(self) -> dict:
        mono = [i.monotonicity for i in self.items if i.monotonicity is not None]
        return {
            "terms": len(self.items),
            "failures": len(self.failures),
            "monotonicity_edges": sum(m.edges for m in mono),
            "degree_increases": sum(m.degree_increases for m in mono),
            "substitution_pairs": len(self.substitution),
            "substitution_failures": len(self.substitution_failures),
            "ok": self.ok,
        }

    def to_json(self) -> dict:
        return {"summary": self.summary(), "items": [i.to_json() for i in self.items],
                "failures": [format_term(i.term) for i in self.failures]}


def run_corpus(seed: int = 42, count: int = 500, max_size: int = 12,
               bounds: SearchBounds | None = None, fuel: int = DEFAULT_FUEL,
               monotonicity_max_size: int = 12, substitution_pairs_count: int = 200
               ) -> CorpusReport:
    items = []
    for m in gen_sn_terms(seed, count, max_size):
        try:
            pi, d, _ = search(m, bounds)
        except BoundsExhausted as e:
            items.append(CorpusItem(m, None, None, False, {}, None, None, [], str(e)))
            continue
        checked = check_derivation(pi).ok
        mono = None
        if term_size(m) <= monotonicity_max_size:
            mono = check_weight_monotonicity(pi, fuel)
        items.append(CorpusItem(m, pi, d, checked, check_lemma3m(pi), verify_bounds(m, pi, fuel),
                                mono, intersection_tree_violations(pi)))
    derivations = [i.derivation for i in items if i.derivation is not None]
    subst = [check_weighted_substitution(s, p, x)
             for s, p, x in substitution_pairs(derivations, substitution_pairs_count, seed)]
    return CorpusReport(items, subst)

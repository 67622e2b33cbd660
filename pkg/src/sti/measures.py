"""Proof measures: size, rank, degree and the parametric weight."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .derivation import Derivation, Rule
from .terms import free_vars, term_size

__all__ = ["proof_size", "rank", "degree", "weight", "mux_rank", "MeasureReport",
           "measure_report"]


def proof_size(d: Derivation) -> int:
    """Number of rule applications in d."""
    return 1 + sum(proof_size(p) for p in d.premises)


def mux_rank(d: Derivation) -> int:
    """Rank of a single (m) node: how many merged variables are free in its premise subject."""
    fv = free_vars(d.premises[0].term)
    return sum(1 for v in d.merged if v in fv)


def rank(d: Derivation) -> int:
    best = 1
    stack = [d]
    while stack:
        n = stack.pop()
        if n.rule is Rule.MUX:
            best = max(best, mux_rank(n))
        stack.extend(n.premises)
    return best


def degree(d: Derivation) -> int:
    """Maximal number of (∧n) nodes on a path from the conclusion to an axiom."""
    below = max((degree(p) for p in d.premises), default=0)
    return below + (1 if d.rule is Rule.AND else 0)


def weight(d: Derivation, r: int) -> int:
    if r < 1:
        raise ValueError("weight is defined for r >= 1")
    rule = d.rule
    if rule is Rule.AX:
        return 1
    if rule is Rule.AND:
        return r * max(weight(p, r) for p in d.premises)
    if rule in (Rule.WEAKEN, Rule.MUX):
        return weight(d.premises[0], r)
    return 1 + sum(weight(p, r) for p in d.premises)


@dataclass(frozen=True)
class MeasureReport:
    proof_size: int
    subject_size: int
    rank: int
    degree: int
    weights: dict

    def weight_at(self, r: int) -> int:
        return self.weights[r]

    def to_json(self) -> dict:
        return {
            "proof_size": self.proof_size,
            "subject_size": self.subject_size,
            "rank": self.rank,
            "degree": self.degree,
            "weights": {str(r): w for r, w in sorted(self.weights.items())},
        }


def measure_report(d: Derivation, rs: Iterable[int] | None = None) -> MeasureReport:
    """All measures of d; weights at 1, the rank, and any extra r requested."""
    rk = rank(d)
    wanted = {1, rk} if rs is None else set(rs)
    return MeasureReport(
        proof_size=proof_size(d),
        subject_size=term_size(d.term),
        rank=rk,
        degree=degree(d),
        weights={r: weight(d, r) for r in sorted(wanted)},
    )

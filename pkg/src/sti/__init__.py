"""Strict (non-idempotent) intersection types for the lambda calculus.

Terms and reduction live in ``sti.terms``, types in ``sti.itypes``,
derivations and their checker in ``sti.derivation``.  ``sti.transform``
carries derivations along beta-reduction, ``sti.measures`` computes the
proof measures, ``sti.inference`` searches for minimal derivations and
``sti.harness`` checks the reduction bounds over generated corpora.
"""

from .derivation import Derivation, Rule, check_derivation
from .inference import BoundsExhausted, SearchBounds, infer, infer_minimal_depth
from .itypes import Arrow, Context, Inter, TVar, parse_type, type_equal
from .measures import degree, measure_report, proof_size, rank, weight
from .terms import Strategy, format_term, normalize, parse_term, term_size
from .transform import normalize_with_derivation, reduce_subject, subst_derivation

__all__ = [
    "Derivation", "Rule", "check_derivation", "BoundsExhausted", "SearchBounds", "infer",
    "infer_minimal_depth", "Arrow", "Context", "Inter", "TVar", "parse_type", "type_equal",
    "degree", "measure_report", "proof_size", "rank", "weight", "Strategy", "format_term",
    "normalize", "parse_term", "term_size", "normalize_with_derivation", "reduce_subject",
    "subst_derivation",
]

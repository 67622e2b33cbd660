"""Command-line front end: ``sti <command> [options]``.

Exit codes: 0 success, 1 a verdict failed, 2 usage or parse error,
3 fuel or search bounds exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys

from .derivation import check_derivation
from .harness import format_remark_table, remark_family_report, run_corpus, verify_bounds
from .inference import BoundsExhausted, SearchBounds, search
from .itypes import TypeSyntaxError
from .measures import measure_report
from .serialize import SchemaError, deserialize, parse_pretty, pretty_print, serialize
from .terms import (DEFAULT_FUEL, FuelExhausted, ParseError, Strategy, format_term, normalize,
                    parse_term, pick_redex, term_size)
from .transform import normalize_with_derivation

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_EXHAUSTED = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _emit(args, doc, text: str):
    if args.format == "json":
        print(json.dumps(doc, indent=2, ensure_ascii=False))
    else:
        print(text)


def _read_input(args) -> str:
    if (args.expr is None) == (args.file is None):
        raise UsageError("give exactly one of -e EXPR or -f FILE")
    if args.expr is not None:
        return args.expr
    if args.file == "-":
        return sys.stdin.read()
    try:
        with open(args.file, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {args.file}: {e.strerror}") from None


def _bounds(args) -> SearchBounds:
    try:
        return SearchBounds(args.max_type_elements, args.max_degree, args.max_proof_size,
                            args.time_fuel)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _load_derivation(text: str, check: bool = True):
    """Derivation from JSON, or from the indented text form."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise UsageError(f"invalid JSON: {e}") from None
        if isinstance(doc, dict) and "derivation" in doc:
            doc = doc["derivation"]
        return deserialize(doc, check)
    return parse_pretty(text, check=check)


def _derivation_or_infer(args):
    """Input is a derivation document, or a term to run the search on."""
    text = _read_input(args)
    stripped = text.lstrip()
    if stripped.startswith("{") or "⊢" in text:
        return _load_derivation(text)
    return search(parse_term(text), _bounds(args))[0]


# --------------------------------------------------------------------------
# commands

def cmd_parse(args) -> int:
    m = parse_term(_read_input(args))
    _emit(args, {"term": format_term(m), "size": term_size(m)}, format_term(m))
    return EXIT_OK


def cmd_check(args) -> int:
    d = _load_derivation(_read_input(args), check=False)
    report = check_derivation(d)
    doc = {"ok": report.ok, "violations": [
        {"path": list(v.path), "rule": v.rule, "message": v.message} for v in report.violations]}
    _emit(args, doc, "ok" if report.ok else str(report))
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_infer(args) -> int:
    m = parse_term(_read_input(args))
    d, deg, stats = search(m, _bounds(args))
    report = measure_report(d)
    doc = {"derivation": serialize(d), "conclusion": str(d.conclusion),
           "minimal_degree": deg, "measures": report.to_json(), "stats": stats.to_json()}
    text = "\n".join([pretty_print(d), "",
                      f"minimal degree {deg}; proof size {report.proof_size}; rank {report.rank}"])
    _emit(args, doc, text)
    return EXIT_OK


def cmd_measure(args) -> int:
    d = _derivation_or_infer(args)
    rs = args.r if args.r else None
    report = measure_report(d, rs)
    text = "\n".join(f"{k:<13} {v}" for k, v in [
        ("proof_size", report.proof_size), ("subject_size", report.subject_size),
        ("rank", report.rank), ("degree", report.degree)]
        + [(f"weight r={r}", w) for r, w in sorted(report.weights.items())])
    _emit(args, report.to_json(), text)
    return EXIT_OK


def cmd_reduce(args) -> int:
    strategy = Strategy.parse(args.strategy)
    if args.with_derivation:
        d = _derivation_or_infer(args)
        trace = normalize_with_derivation(d, strategy, args.fuel)
        doc = trace.to_json()
        lines = []
        for e in trace.entries:
            ws = ", ".join(f"W{r}={w}" for r, w in sorted(e.measures.weights.items()))
            lines.append(f"{format_term(e.term)}    [{ws}; copies {e.virtual_copies}]")
        _emit(args, doc, "\n".join(lines))
        return EXIT_OK
    m = parse_term(_read_input(args))
    terms = normalize(m, strategy, args.fuel)
    doc = [{"term": format_term(t), "redex": _path(pick_redex(t, strategy))} for t in terms]
    _emit(args, doc, "\n".join(format_term(t) for t in terms))
    return EXIT_OK


def _path(p):
    return None if p is None else list(p)


def cmd_verify(args) -> int:
    text = _read_input(args)
    if text.lstrip().startswith("{") or "⊢" in text:
        d = _load_derivation(text)
    else:
        d = search(parse_term(text), _bounds(args))[0]
    report = verify_bounds(d.term, d, args.fuel)
    _emit(args, report.to_json(), report.to_text())
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_remark(args) -> int:
    if args.n_max < 1:
        raise UsageError("--n-max must be at least 1")
    rows = remark_family_report(args.n_max, _bounds(args), args.fuel)
    _emit(args, [r.to_json() for r in rows], format_remark_table(rows))
    return EXIT_OK if all(r.ok for r in rows) else EXIT_FAIL


def cmd_fuzz(args) -> int:
    report = run_corpus(args.seed, args.count, args.max_size, _bounds(args), args.fuel,
                        substitution_pairs_count=args.subst_pairs)
    summary = report.summary()
    text = "\n".join(f"{k:<22} {v}" for k, v in summary.items())
    if report.failures:
        text += "\nfailing terms:\n" + "\n".join(
            "  " + format_term(i.term) for i in report.failures)
    _emit(args, report.to_json() if args.full else {"summary": summary, "failures": [
        format_term(i.term) for i in report.failures]}, text)
    return EXIT_OK if report.ok else EXIT_FAIL


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sti", description="Strict intersection types: checking, inference, reduction bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json"], default="text")
    common.add_argument("--fuel", type=int, default=DEFAULT_FUEL)

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("-e", "--expr", help="inline input")
    source.add_argument("-f", "--file", help="input file ('-' for stdin)")

    defaults = SearchBounds()
    bounds = argparse.ArgumentParser(add_help=False)
    bounds.add_argument("--max-type-elements", type=int, default=defaults.max_type_elements)
    bounds.add_argument("--max-degree", type=int, default=defaults.max_degree)
    bounds.add_argument("--max-proof-size", type=int, default=defaults.max_proof_size)
    bounds.add_argument("--time-fuel", type=int, default=defaults.time_fuel)

    def add(name, func, parents, help):
        p = sub.add_parser(name, parents=parents, help=help)
        p.set_defaults(func=func)
        return p

    add("parse", cmd_parse, [common, source], "parse a term and print it canonically")
    add("check", cmd_check, [common, source], "check a derivation (JSON or text form)")
    add("infer", cmd_infer, [common, source, bounds], "search for a minimal derivation")
    p = add("measure", cmd_measure, [common, source, bounds], "measures of a derivation")
    p.add_argument("--r", type=int, action="append", help="weight parameter (repeatable)")
    p = add("reduce", cmd_reduce, [common, source, bounds], "normalize a term")
    p.add_argument("--strategy", choices=["lo", "ri"], default="lo")
    p.add_argument("--with-derivation", action="store_true",
                   help="carry a derivation along and report its measures per step")
    add("verify", cmd_verify, [common, source, bounds], "check the reduction bounds for a term")
    p = add("remark", cmd_remark, [common, bounds], "report on the (λxy.y x..x)(II) family")
    p.add_argument("--n-max", type=int, default=4)
    p = add("fuzz", cmd_fuzz, [common, bounds], "run all checks over a random corpus")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--max-size", type=int, default=12)
    p.add_argument("--subst-pairs", type=int, default=200)
    p.add_argument("--full", action="store_true", help="include every item in JSON output")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError, TypeSyntaxError, SchemaError) as e:
        print(f"sti: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except BoundsExhausted as e:
        print(f"sti: bounds exhausted: {e}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except FuelExhausted as e:
        print(f"sti: fuel exhausted: {e}", file=sys.stderr)
        return EXIT_EXHAUSTED


if __name__ == "__main__":
    sys.exit(main())

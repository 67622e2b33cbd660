"""JSON and indented-text forms of derivations.

Both readers rebuild nodes with their stored conclusions and then run the
checker, so a document that does not describe a valid derivation is
rejected rather than silently repaired.
"""

from __future__ import annotations

import re

from .derivation import Derivation, Rule, check_derivation
from .itypes import Context, TypeSyntaxError, parse_type, type_from_json, type_to_json
from .terms import ParseError, format_term, parse_term

__all__ = ["SchemaError", "serialize", "deserialize", "pretty_print", "parse_pretty"]


class SchemaError(ValueError):
    """Malformed derivation document, or one that fails the checker."""


_ARITY = {Rule.AX: 0, Rule.WEAKEN: 1, Rule.ARROW_I: 1, Rule.ARROW_E: 2, Rule.MUX: 1}


def _data(d: Derivation) -> dict:
    if d.rule in (Rule.WEAKEN, Rule.ARROW_I):
        return {"var": d.var}
    if d.rule is Rule.AND:
        return {"arity": len(d.premises)}
    if d.rule is Rule.MUX:
        return {"merged": list(d.merged), "var": d.var}
    return {}


def serialize(d: Derivation) -> dict:
    return {
        "rule": d.rule.value,
        "ctx": [{"var": v, "type": type_to_json(t)} for v, t in d.ctx.items()],
        "term": format_term(d.term),
        "type": type_to_json(d.type),
        "premises": [serialize(p) for p in d.premises],
        "data": _data(d),
    }


def _node(rule: Rule, ctx: Context, term, typ, premises: tuple, data: dict) -> Derivation:
    want = _ARITY.get(rule)
    if want is not None and len(premises) != want:
        raise SchemaError(f"rule {rule.value} takes {want} premises, got {len(premises)}")
    var, merged = None, ()
    if rule in (Rule.WEAKEN, Rule.ARROW_I, Rule.MUX):
        var = data.get("var")
        if not isinstance(var, str):
            raise SchemaError(f"rule {rule.value} needs a variable name in data")
    if rule is Rule.AND:
        arity = data.get("arity", len(premises))
        if not isinstance(arity, int) or arity < 2 or arity != len(premises):
            raise SchemaError(f"(∧n) arity must be n >= 2 and match the premises, got {arity!r}")
    if rule is Rule.MUX:
        merged = data.get("merged")
        if not isinstance(merged, list) or not all(isinstance(v, str) for v in merged):
            raise SchemaError("(m) needs a list of merged variables")
        if len(merged) < 2:
            raise SchemaError("(m) merges at least two variables")
        merged = tuple(merged)
    return Derivation(rule, ctx, term, typ, premises, var=var, merged=merged)


def _from_doc(doc) -> Derivation:
    if not isinstance(doc, dict):
        raise SchemaError(f"derivation node must be an object, got {type(doc).__name__}")
    missing = {"rule", "ctx", "term", "type"} - doc.keys()
    if missing:
        raise SchemaError(f"node lacks {', '.join(sorted(missing))}")
    try:
        rule = Rule(doc["rule"])
    except ValueError:
        raise SchemaError(f"unknown rule {doc['rule']!r}") from None
    try:
        ctx = Context((b["var"], type_from_json(b["type"])) for b in doc["ctx"])
        term = parse_term(doc["term"])
        typ = type_from_json(doc["type"])
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"malformed node: {e}") from None
    premises = doc.get("premises", [])
    data = doc.get("data", {})
    if not isinstance(premises, list) or not isinstance(data, dict):
        raise SchemaError("premises must be a list and data an object")
    return _node(rule, ctx, term, typ, tuple(_from_doc(p) for p in premises), data)


def _checked(d: Derivation) -> Derivation:
    report = check_derivation(d)
    if not report.ok:
        raise SchemaError(f"derivation fails the checker:\n{report}")
    return d


def deserialize(doc, check: bool = True) -> Derivation:
    """Rebuild a derivation; with check=False only the schema is validated."""
    d = _from_doc(doc)
    return _checked(d) if check else d


# --------------------------------------------------------------------------
# text form

def _annotation(d: Derivation) -> str:
    r = d.rule
    if r in (Rule.WEAKEN, Rule.ARROW_I):
        return f"{r.label} {d.var}"
    if r is Rule.AND:
        return f"∧{len(d.premises)}"
    if r is Rule.MUX:
        return f"m {','.join(d.merged)} -> {d.var}"
    return r.label


def pretty_print(d: Derivation, indent: str = "  ") -> str:
    """One node per line, conclusion first, premises indented beneath it."""
    lines = []

    def go(d: Derivation, depth: int):
        lines.append(f"{indent * depth}{d.conclusion}  ({_annotation(d)})")
        for p in d.premises:
            go(p, depth + 1)

    go(d, 0)
    return "\n".join(lines)


_LINE = re.compile(r"^(?P<ind> *)(?P<seq>.*?)  \((?P<ann>[^()]*)\)\s*$")
_RULES = {"Ax": Rule.AX, "w": Rule.WEAKEN, "→I": Rule.ARROW_I, "->I": Rule.ARROW_I,
          "→E": Rule.ARROW_E, "->E": Rule.ARROW_E, "m": Rule.MUX}


def _parse_annotation(ann: str) -> tuple[Rule, dict]:
    ann = ann.strip()
    if ann.startswith("∧") or ann.startswith("and"):
        digits = ann.lstrip("∧and ")
        if not digits.isdigit():
            raise SchemaError(f"bad (∧n) annotation {ann!r}")
        return Rule.AND, {"arity": int(digits)}
    head, _, rest = ann.partition(" ")
    rule = _RULES.get(head)
    if rule is None:
        raise SchemaError(f"unknown rule annotation {ann!r}")
    rest = rest.strip()
    if rule is Rule.MUX:
        merged, arrow, var = rest.partition("->")
        if not arrow:
            raise SchemaError(f"bad (m) annotation {ann!r}")
        return rule, {"merged": [v.strip() for v in merged.split(",") if v.strip()],
                      "var": var.strip()}
    if rule in (Rule.WEAKEN, Rule.ARROW_I):
        return rule, {"var": rest}
    return rule, {}


def _parse_sequent(text: str):
    left, sep, right = text.partition("⊢")
    if not sep:
        raise SchemaError(f"missing ⊢ in {text!r}")
    bindings = []
    left = left.strip()
    if left:
        for part in left.split(", "):
            name, colon, t = part.partition(":")
            if not colon:
                raise SchemaError(f"bad context binding {part!r}")
            bindings.append((name.strip(), parse_type(t)))
    term, colon, t = right.partition(":")
    if not colon:
        raise SchemaError(f"missing ':' in {right!r}")
    return Context(bindings), parse_term(term), parse_type(t)


def parse_pretty(text: str, indent: str = "  ", check: bool = True) -> Derivation:
    """Read back the output of pretty_print."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        m = _LINE.match(line)
        if m is None:
            raise SchemaError(f"line {lineno}: not a derivation line")
        depth, extra = divmod(len(m.group("ind")), len(indent))
        if extra:
            raise SchemaError(f"line {lineno}: bad indentation")
        try:
            ctx, term, typ = _parse_sequent(m.group("seq"))
        except (ParseError, TypeSyntaxError) as e:
            raise SchemaError(f"line {lineno}: {e}") from None
        rule, data = _parse_annotation(m.group("ann"))
        rows.append((depth, rule, ctx, term, typ, data))
    if not rows:
        raise SchemaError("empty derivation text")

    pos = 0

    def build(depth: int) -> Derivation:
        nonlocal pos
        d, rule, ctx, term, typ, data = rows[pos]
        if d != depth:
            raise SchemaError(f"unexpected indentation depth {d}, wanted {depth}")
        pos += 1
        premises = []
        while pos < len(rows) and rows[pos][0] > depth:
            premises.append(build(depth + 1))
        return _node(rule, ctx, term, typ, tuple(premises), data)

    root = build(0)
    if pos != len(rows):
        raise SchemaError("trailing lines after the root derivation")
    return _checked(root) if check else root


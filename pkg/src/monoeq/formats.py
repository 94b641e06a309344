"""Plain-text files for posets, measures, systems and generators.

Poset file::

    elements: a b c d
    a < b
    b < d

System file, one index element per line (a lone measure may drop the label)::

    a: b=1/2 c=1/2
    d: d=1

Generator file; cover lines are optional and give the order on the states::

    states: x y z
    x < y
    x: y=1 z=2

``#`` starts a comment.  Rationals are integers or ``p/q``; decimals are
rejected.  The dump functions write a canonical form, so
``dump(load(dump(x))) == dump(x)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from .markov import Generator, generator
from .measures import MeasureSystem, RationalMeasure, measure, system
from .poset import Poset, PosetError, from_cover_edges, induced

_NAME = r"[A-Za-z0-9_'.+-]+"
_NAME_RE = re.compile(rf"^{_NAME}$")
_RAT_RE = re.compile(r"^-?\d+(/\d+)?$")
_HEADER_RE = re.compile(r"^(elements|states)\s*:(.*)$")
_ROW_RE = re.compile(rf"^({_NAME})\s*:(.*)$")
_COVER_RE = re.compile(rf"^({_NAME})\s*<\s*({_NAME})$")
_KEYWORDS = {"elements", "states"}


class ParseError(ValueError):
    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


def fmt(q) -> str:
    """Lowest-terms ``p/q``, or ``p`` when the denominator is one."""
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_rational(tok: str, line: Optional[int] = None) -> Fraction:
    if not _RAT_RE.match(tok):
        raise ParseError(f"bad rational {tok!r}", line)
    try:
        return Fraction(tok)
    except ZeroDivisionError:
        raise ParseError(f"zero denominator in {tok!r}", line) from None


@dataclass
class Document:
    header: Optional[str] = None
    names: List[str] = field(default_factory=list)
    covers: List[Tuple[str, str]] = field(default_factory=list)
    rows: Dict[Optional[str], Dict[str, Fraction]] = field(default_factory=dict)
    order: List[Optional[str]] = field(default_factory=list)
    lines: Dict[object, int] = field(default_factory=dict)


def _names(toks: List[str], line: int) -> List[str]:
    for t in toks:
        if not _NAME_RE.match(t):
            raise ParseError(f"bad element name {t!r}", line)
    if len(set(toks)) != len(toks):
        raise ParseError("repeated element name", line)
    return toks


def _masses(body: str, line: int) -> Dict[str, Fraction]:
    out: Dict[str, Fraction] = {}
    for tok in body.replace(",", " ").split():
        if "=" not in tok:
            raise ParseError(f"expected name=value, got {tok!r}", line)
        k, v = tok.split("=", 1)
        if not _NAME_RE.match(k):
            raise ParseError(f"bad element name {k!r}", line)
        if k in out:
            raise ParseError(f"{k!r} given twice", line)
        out[k] = parse_rational(v, line)
    return out


def parse(text: str) -> Document:
    doc = Document()
    for n, raw in enumerate(text.splitlines(), 1):
        s = raw.split("#", 1)[0].strip()
        if not s:
            continue
        m = _HEADER_RE.match(s)
        if m:
            if doc.header is not None:
                raise ParseError("second header line", n)
            if doc.covers or doc.rows:
                raise ParseError(f"{m.group(1)} line must come first", n)
            doc.header = m.group(1)
            doc.names = _names(m.group(2).split(), n)
            doc.lines["header"] = n
            continue
        m = _COVER_RE.match(s)
        if m:
            doc.covers.append((m.group(1), m.group(2)))
            doc.lines[(m.group(1), m.group(2))] = n
            continue
        m = _ROW_RE.match(s)
        label, body = (m.group(1), m.group(2)) if m else (None, s)
        if label is None and "=" not in s:
            raise ParseError(f"cannot read {s!r}", n)
        if label in doc.rows:
            raise ParseError(f"row {label} given twice" if label else "second unlabelled row", n)
        doc.rows[label] = _masses(body, n)
        doc.order.append(label)
        doc.lines[label] = n
    return doc


def _poset_of(doc: Document) -> Poset:
    if doc.header is None and not doc.covers:
        raise ParseError("no elements")
    names = list(doc.names)
    declared = set(names)
    for x, y in doc.covers:
        for z in (x, y):
            if z not in declared:
                if doc.header is not None:
                    raise ParseError(f"cover uses undeclared element {z!r}", doc.lines[(x, y)])
                declared.add(z)
                names.append(z)
    try:
        return from_cover_edges(names, doc.covers)
    except PosetError as e:
        bad = next((doc.lines[c] for c in doc.covers if c[0] in str(e) or c[1] in str(e)), None)
        raise ParseError(str(e), bad) from e


def _measure(S: Poset, row: Mapping[str, Fraction], where: Optional[int]) -> RationalMeasure:
    for k in row:
        if k not in S:
            raise ParseError(f"unknown element {k!r}", where)
    try:
        return measure(S, row)
    except ValueError as e:
        raise ParseError(str(e), where) from e


def load_poset(text: str) -> Poset:
    doc = parse(text)
    if doc.header == "states":
        raise ParseError("expected an elements line, got states", doc.lines["header"])
    if doc.rows:
        raise ParseError("measure rows in a poset file", min(doc.lines[k] for k in doc.rows))
    return _poset_of(doc)


def load_measure(text: str, S: Poset) -> RationalMeasure:
    doc = parse(text)
    if doc.header or doc.covers:
        raise ParseError("a measure file holds measure rows only")
    if len(doc.rows) != 1:
        raise ParseError(f"expected one measure row, got {len(doc.rows)}")
    (label, row), = doc.rows.items()
    return _measure(S, row, doc.lines[label])


def load_system(text: str, S: Poset) -> MeasureSystem:
    """Rows keyed by index elements; the index is the induced subposet on the labels."""
    doc = parse(text)
    if doc.header or doc.covers:
        raise ParseError("a system file holds measure rows only")
    if not doc.rows:
        raise ParseError("no measure rows")
    for a in doc.order:
        if a is None:
            raise ParseError("system rows need a label", doc.lines[a])
        if a not in S:
            raise ParseError(f"index element {a!r} is not in the poset", doc.lines[a])
    A = induced(S, doc.order)
    return system(A, S, {a: _measure(S, doc.rows[a], doc.lines[a]) for a in doc.order})


def load_generator(text: str) -> Generator:
    doc = parse(text)
    if doc.header != "states":
        raise ParseError("generator file must start with a states line")
    S = _poset_of(doc)
    rates = {}
    for x in doc.order:
        where = doc.lines[x]
        if x is None or x not in S:
            raise ParseError(f"unknown state {x!r}", where)
        row = doc.rows[x]
        for y, v in row.items():
            if y not in S:
                raise ParseError(f"unknown state {y!r}", where)
            if y == x:
                raise ParseError("diagonal rates are derived, not given", where)
            if v < 0:
                raise ParseError(f"negative rate {fmt(v)}", where)
        rates[x] = row
    try:
        return generator(S, rates)
    except ValueError as e:
        raise ParseError(str(e)) from e


# -- dumping ------------------------------------------------------------------


def _covers(S: Poset) -> List[str]:
    return [f"{x} < {y}" for x, y in sorted(S.covers, key=lambda c: (S._i(c[0]), S._i(c[1])))]


def dump_poset(S: Poset) -> str:
    return "\n".join(["elements: " + " ".join(S.elements)] + _covers(S)) + "\n"


def _row(m: RationalMeasure) -> str:
    return " ".join(f"{x}={fmt(v)}" for x, v in zip(m.poset.elements, m.masses) if v)


def dump_measure(m: RationalMeasure) -> str:
    return _row(m) + "\n"


def dump_system(P: MeasureSystem) -> str:
    return "".join(f"{a}: {_row(m)}".rstrip() + "\n" for a, m in P.items())


def dump_generator(L: Generator) -> str:
    lines = ["states: " + " ".join(L.poset.elements)] + _covers(L.poset)
    for x, row in L.off_diagonal().items():
        lines.append(f"{x}: " + " ".join(f"{y}={fmt(v)}" for y, v in row.items()))
    return "\n".join(s.rstrip() for s in lines) + "\n"

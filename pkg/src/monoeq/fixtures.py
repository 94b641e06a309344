"""Counterexample systems: stochastically monotone, yet no theta > 0 makes them realizable.

Each fixture ships a small concrete host poset meeting its case hypotheses,
and the labelled patterns the argument needs are checked on construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from .classify import BOWTIE, DIAMOND, Y_POSET
from .feasibility import max_theta
from .measures import MeasureError, MeasureSystem, indicator, system, system_is_stoch_monotone
from .poset import Poset, from_cover_edges, induced

HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)


class RuleGap(MeasureError):
    """The diamond-to-host extension rule assigns nothing to some element."""


@dataclass(frozen=True)
class Fixture:
    name: str
    provenance: str
    poset: Poset
    system: MeasureSystem
    full: Optional[MeasureSystem]
    patterns: Mapping[str, Mapping[str, str]]
    core: Optional[Tuple[str, ...]] = None

    expected_stoch_monotone = True
    expected_max_theta = Fraction(0)

    def core_system(self) -> MeasureSystem:
        """The system cut down to ``core``.

        A law realizing theta*P + (1-theta)*I restricts to one for any
        sub-index, so theta = 0 on the core forces theta = 0 on the whole.
        """
        if self.core is None:
            return self.system
        A = induced(self.system.index, self.core)
        return system(A, self.system.support, {a: self.system[a] for a in self.core})

    def check(self, full: bool = False) -> Dict[str, object]:
        """Recompute the expectations.

        ``max_theta`` is solved on the core, which bounds it from above.
        ``full`` also solves the whole system and the host-wide extension.
        """
        out: Dict[str, object] = {
            "stoch_monotone": system_is_stoch_monotone(self.system),
            "max_theta": max_theta(self.core_system()),
        }
        if full:
            if self.core is not None:
                out["system_max_theta"] = max_theta(self.system)
            if self.full is not None and self.full is not self.system:
                out["full_stoch_monotone"] = system_is_stoch_monotone(self.full)
                out["full_max_theta"] = max_theta(self.full)
        return out

    def passes(self, full: bool = False) -> bool:
        got = self.check(full)
        return all(
            got[k] == (self.expected_stoch_monotone if "monotone" in k else self.expected_max_theta)
            for k in got
        )


def _induces(S: Poset, pattern: Poset, labels: Mapping[str, str]) -> bool:
    """True when ``labels`` (pattern name -> host element) is an order embedding."""
    if len(set(labels.values())) != len(pattern):
        return False
    return all(
        pattern.leq(x, y) == S.leq(labels[x], labels[y])
        for x in pattern.elements
        for y in pattern.elements
    )


def _validated(S: Poset, patterns: Mapping[str, tuple]) -> Dict[str, Dict[str, str]]:
    out = {}
    for name, (pat, labels) in patterns.items():
        if not _induces(S, pat, labels):  # pragma: no cover - host tables are fixed
            raise AssertionError(f"host lacks the {name} pattern")
        out[name] = dict(labels)
    return out


def _diamond_system(S: Poset, rows: Mapping[str, tuple]) -> MeasureSystem:
    A = induced(S, "abcd")
    return system(A, S, {x: indicator(S, us, HALF) for x, us in rows.items()})


def extend_to_full(S: MeasureSystem, host: Optional[Poset] = None) -> MeasureSystem:
    """Give every host element a measure: P_d above b or c, P_a off the down-sets of b and c."""
    host = S.support if host is None else host
    A = S.index
    if not all(x in A and x in host for x in "abcd") or A != induced(host, "abcd") or induced(A, "abcd") != DIAMOND:
        raise MeasureError("index must be the diamond a<b,c<d inside the host")
    fam = {}
    for x in host.elements:
        if x in A:
            fam[x] = S[x]
        elif host.lt("b", x) or host.lt("c", x):
            fam[x] = S["d"]
        elif not host.leq(x, "b") and not host.leq(x, "c"):
            fam[x] = S["a"]
        else:
            raise RuleGap(f"no rule covers {x!r}")
    return system(host, host, fam)


# -- bipartite block whose lower piece is not in Y-class ----------------------------------------

BIPARTITE_CASES = ("h=b2", "h-in-S1")


def fixture_bipartite_violation(case: str = "h=b2") -> Fixture:
    """Bowtie a1,a2 < b1,b2 with a second bowtie e,f < g,h hanging off a2."""
    bip = [("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a2", "b2")]
    if case == "h=b2":
        S = from_cover_edges(["a1", "a2", "b1", "b2", "e", "f", "g"], bip + [("e", "a2"), ("f", "a2"), ("a2", "g")])
        h = "b2"
    elif case == "h-in-S1":
        S = from_cover_edges(
            ["a1", "a2", "b1", "b2", "e", "f", "g", "h"],
            bip + [("e", "a2"), ("f", "a2"), ("a2", "g"), ("a2", "h")],
        )
        h = "h"
    else:
        raise ValueError(f"unknown case {case!r}; expected one of {BIPARTITE_CASES}")
    core = {"a1", "a2", "b1", "b2"}
    up = {x for x in S.elements if x not in core and (S.leq("a1", x) or S.leq("a2", x))}
    fam = {
        "a1": indicator(S, ["e", "f", h], THIRD),
        "a2": indicator(S, ["e", "f", "g"], THIRD),
        "b1": indicator(S, ["f", "g", h], THIRD),
        "b2": indicator(S, ["e", "g", h], THIRD),
    }
    for x in S.elements:
        if x in core:
            continue
        fam[x] = indicator(S, ["g", h], HALF) if x in up else indicator(S, ["e", "f"], HALF)
    P = system(S, S, fam)
    pats = _validated(S, {
        "bipartite": (BOWTIE, {"e": "a1", "f": "a2", "g": "b1", "h": "b2"}),
        "bowtie": (BOWTIE, {"e": "e", "f": "f", "g": "g", "h": h}),
    })
    return Fixture(f"bipartite-violation/{case}", "bipartite block with a lower piece outside Y-class", S, P, P, pats,
                   core=("a1", "a2", "b1", "b2"))


# -- a second cycle next to the diamond ----------------------------------------------------

DIAMOND_EDGES = [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")]
SECOND_CYCLE_CASES = ("bowtie-e=a", "bowtie-e=b", "second-diamond")


def fixture_second_cycle(case: str = "bowtie-e=a") -> Fixture:
    if case == "bowtie-e=a":
        S = from_cover_edges("abcdfgh", DIAMOND_EDGES + [("a", "g"), ("a", "h"), ("f", "g"), ("f", "h")])
        rows = {"a": "af", "b": "fh", "c": "fg", "d": "gh"}
        pats = {"bowtie": (BOWTIE, {"e": "a", "f": "f", "g": "g", "h": "h"})}
    elif case == "bowtie-e=b":
        # h is the top of the diamond
        S = from_cover_edges("abcdfg", DIAMOND_EDGES + [("b", "g"), ("f", "g"), ("f", "d")])
        rows = {"a": "bf", "b": "bg", "c": "fg", "d": "dg"}
        pats = {"bowtie": (BOWTIE, {"e": "b", "f": "f", "g": "g", "h": "d"})}
    elif case == "second-diamond":
        # a' = d, stacked
        S = from_cover_edges(
            ["a", "b", "c", "d", "b'", "c'", "d'"],
            DIAMOND_EDGES + [("d", "b'"), ("d", "c'"), ("b'", "d'"), ("c'", "d'")],
        )
        rows = {"a": ["d", "b'"], "b": ["b'", "c'"], "c": ["d", "d'"], "d": ["b'", "d'"]}
        pats = {"second diamond": (DIAMOND, {"a": "d", "b": "b'", "c": "c'", "d": "d'"})}
    else:
        raise ValueError(f"unknown case {case!r}; expected one of {SECOND_CYCLE_CASES}")
    pats["diamond"] = (DIAMOND, {x: x for x in "abcd"})
    P = _diamond_system(S, rows)
    return Fixture(f"second-cycle/{case}", "diamond plus a second cycle", S, P, extend_to_full(P), _validated(S, pats))


def fixture_yposet() -> Fixture:
    """Unique diamond and a Y-poset e<f<d, f<h meeting it only at d."""
    S = from_cover_edges("abcdefh", DIAMOND_EDGES + [("e", "f"), ("f", "d"), ("f", "h")])
    P = _diamond_system(S, {"a": "ef", "b": "ed", "c": "eh", "d": "dh"})
    pats = _validated(S, {
        "diamond": (DIAMOND, {x: x for x in "abcd"}),
        "Y": (Y_POSET, {"e": "e", "f": "f", "g": "d", "h": "h"}),
    })
    return Fixture("y-poset", "diamond plus a Y-poset sharing one element", S, P, extend_to_full(P), pats)


def all_fixtures() -> List[Fixture]:
    out = [fixture_bipartite_violation(c) for c in BIPARTITE_CASES]
    out += [fixture_second_cycle(c) for c in SECOND_CYCLE_CASES]
    out.append(fixture_yposet())
    return out

"""Poset subclasses and the trichotomy verdict.

A connected poset admits monotonicity equivalence for continuous-time chains
exactly when it is acyclic, a Y-glued bipartite, or a W-glued diamond.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Tuple

from .poset import (
    Poset,
    PosetError,
    _bits,
    canonical_form,
    contains_induced,
    dual,
    find_induced,
    from_canonical,
    from_cover_edges,
    induced,
)

ACYCLIC = "Acyclic"
Y_GLUED = "YGluedBipartite"
W_GLUED = "WGluedDiamond"
FAILS = "Fails"
KINDS = (ACYCLIC, Y_GLUED, W_GLUED, FAILS)

Bipartite = Tuple[Tuple[str, ...], Tuple[str, ...]]


class NotMaximalBipartite(PosetError):
    pass


# -- pattern catalog ------------------------------------------------------------

DIAMOND = from_cover_edges("abcd", [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])
BOWTIE = from_cover_edges("efgh", [("e", "g"), ("e", "h"), ("f", "g"), ("f", "h")])
Y_POSET = from_cover_edges("efgh", [("e", "f"), ("f", "g"), ("f", "h")])
W_POSET = from_cover_edges("efgh", [("e", "f"), ("e", "g"), ("e", "h")])
S1 = from_cover_edges("abcdx", [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d"), ("x", "a")])
S4_HAT = from_cover_edges(
    "abcdxy", [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d"), ("x", "c"), ("c", "y")]
)


def crown(k: int) -> Poset:
    """The k-crown: a_i < b_i and a_i < b_{i+1 mod k}."""
    if k < 2:
        raise ValueError("crown needs k >= 2")
    lows = [f"a{i}" for i in range(k)]
    highs = [f"b{i}" for i in range(k)]
    covers = set()
    for i in range(k):
        covers.add((lows[i], highs[i]))
        covers.add((lows[i], highs[(i + 1) % k]))
    return from_cover_edges(lows + highs, covers)


CATALOG: Dict[str, Poset] = {
    "diamond": DIAMOND,
    "bowtie": BOWTIE,
    "Y": Y_POSET,
    "W": W_POSET,
    "S1": S1,
    "S4hat": S4_HAT,
    "3-crown": crown(3),
}


# -- subclasses -----------------------------------------------------------------


def is_acyclic(P: Poset) -> bool:
    return P.is_connected() and len(P.covers) == len(P) - 1


def is_y_class(P: Poset) -> bool:
    return is_acyclic(P) and not contains_induced(P, BOWTIE)


def is_w_class(P: Poset) -> bool:
    return (
        is_y_class(P)
        and not contains_induced(P, Y_POSET)
        and not contains_induced(P, dual(Y_POSET))
    )


# -- bipartite subgraphs and the extension step -----------------------------------


def maximal_bipartites(P: Poset) -> List[Bipartite]:
    """Maximal complete bipartite Hasse subgraphs ``lower x upper``, both sides >= 2."""
    out = set()
    for size in range(2, len(P) + 1):
        for lower in combinations(P.elements, size):
            ups = set(P.upper_covers(lower[0]))
            for a in lower[1:]:
                ups &= set(P.upper_covers(a))
            if len(ups) < 2:
                continue
            upper = sorted(ups)
            lows = set(P.lower_covers(upper[0]))
            for b in upper[1:]:
                lows &= set(P.lower_covers(b))
            if lows == set(lower):
                out.add((tuple(lower), tuple(upper)))
    return sorted(out)


def _fresh(P: Poset, base: str = "c") -> str:
    if base not in P:
        return base
    k = 1
    while f"{base}{k}" in P:
        k += 1
    return f"{base}{k}"


def algorithm_ext(P: Poset, bipartite: Bipartite, name: Optional[str] = None) -> Tuple[Poset, Poset, Poset]:
    """Replace the complete bipartite block by a new middle vertex.

    Returns ``(S_hat, S1, S2)``; the new vertex is the one element of
    ``S1 & S2``.
    """
    lower, upper = tuple(sorted(bipartite[0])), tuple(sorted(bipartite[1]))
    if (lower, upper) not in maximal_bipartites(P):
        raise NotMaximalBipartite(f"{lower} x {upper} is not a maximal bipartite subgraph")
    c = name or _fresh(P)
    block = {(a, b) for a in lower for b in upper}
    covers = [e for e in P.covers if e not in block]
    covers += [(a, c) for a in lower] + [(c, b) for b in upper]
    S_hat = from_cover_edges(list(P.elements) + [c], covers)
    at_c = [e for e in S_hat.covers if c in e]
    comps = [comp for comp in S_hat.components(at_c) if c not in comp]
    side1 = {c}
    side2 = {c}
    for comp in comps:
        if comp & set(lower):
            side1 |= comp
        if comp & set(upper):
            side2 |= comp
    return S_hat, induced(S_hat, side1), induced(S_hat, side2)


@lru_cache(maxsize=4096)
def _extendable(key) -> bool:
    P = from_canonical(key)
    if is_acyclic(P):
        return True
    for bip in maximal_bipartites(P):
        S_hat = algorithm_ext(P, bip)[0]
        if _extendable(canonical_form(S_hat)):
            return True
    return False


def has_acyclic_extension(P: Poset) -> bool:
    """Decide by repeated bipartite-to-vertex rewriting.

    Each step lowers the cycle rank of the Hasse diagram by (m-1)(n-1), so
    the search is finite; it succeeds iff some rewriting sequence ends in a
    tree.
    """
    if is_acyclic(P):
        return True
    return _extendable(canonical_form(P))


def brute_force_extension(P: Poset, max_new: int = 3) -> bool:
    """Oracle: try every way of inserting up to ``max_new`` fresh elements.

    A fresh element is placed by choosing its strict down-set D and strict
    up-set U in the current poset with D <= U elementwise.  In a minimal
    extension no fresh element is extremal, so D and U must each meet the
    original elements.  An induced diamond rules out any extension, since a
    tree order cannot hold two incomparable elements strictly between the
    same pair.
    """
    if is_acyclic(P):
        return True
    if contains_induced(P, DIAMOND):
        return False
    n0 = len(P)
    old = (1 << n0) - 1
    start = tuple(P.up)
    seen = set()

    def tree(ups: Tuple[int, ...]) -> bool:
        n = len(ups)
        edges = 0
        for i in range(n):
            strict = ups[i] & ~(1 << i)
            for j in _bits(strict):
                if not (strict & ~(1 << j)) & _downmask(ups, j):
                    edges += 1
        return edges == n - 1

    def search(ups: Tuple[int, ...], left: int) -> bool:
        if tree(ups):
            return True
        if left == 0:
            return False
        n = len(ups)
        downs = [_downmask(ups, j) for j in range(n)]
        for D in _down_sets(ups, downs):
            if not D & old:
                continue
            # elements above all of D
            above = (1 << n) - 1
            for i in _bits(D):
                above &= ups[i] & ~(1 << i)
            for U in _up_sets_within(ups, above):
                if not U & old:
                    continue
                new = tuple(u | (1 << n) if (D >> i) & 1 else u for i, u in enumerate(ups)) + (U | (1 << n),)
                key = _key(new, n0)
                if key in seen:
                    continue
                seen.add(key)
                if search(new, left - 1):
                    return True
        return False

    return search(start, max_new)


def _downmask(ups: Tuple[int, ...], j: int) -> int:
    return sum(1 << i for i, u in enumerate(ups) if (u >> j) & 1)


def _down_sets(ups, downs) -> List[int]:
    n = len(ups)
    out = []
    for m in range(1, 1 << n):
        if all(downs[i] & ~m == 0 for i in _bits(m)):
            out.append(m)
    return out


def _up_sets_within(ups, allowed: int) -> List[int]:
    out = []
    sub = allowed
    while sub:
        if all(ups[i] & ~sub == 0 for i in _bits(sub)):
            out.append(sub)
        sub = (sub - 1) & allowed
    return out


def _key(ups: Tuple[int, ...], n0: int):
    """Relation key with fresh elements sorted by how they sit over the originals."""
    n = len(ups)
    old = (1 << n0) - 1
    fresh = list(range(n0, n))
    sig = {k: (ups[k] & old, _downmask(ups, k) & old) for k in fresh}
    order = list(range(n0)) + sorted(fresh, key=lambda k: sig[k])
    pos = {v: i for i, v in enumerate(order)}
    rel = []
    for v in order:
        rel.append(sum(1 << pos[j] for j in _bits(ups[v])))
    return tuple(rel)


# -- glued classes --------------------------------------------------------------------


def induced_diamonds(P: Poset) -> List[Dict[str, str]]:
    """Induced diamonds modulo the b<->c swap, as maps from a, b, c, d."""
    out = []
    for emb in find_induced(P, DIAMOND):
        if emb["b"] < emb["c"]:
            out.append(emb)
    return out


def hasse_diamonds(P: Poset) -> List[Dict[str, str]]:
    """Induced diamonds whose four relations are covers (4-cycles of the diagram)."""
    return [
        emb
        for emb in induced_diamonds(P)
        if all((emb[x], emb[y]) in P.covers for x, y in DIAMOND.covers)
    ]


@dataclass(frozen=True)
class YGluedEvidence:
    holds: bool
    bipartite: Optional[Bipartite] = None
    S_hat: Optional[Poset] = None
    S1: Optional[Poset] = None
    S2: Optional[Poset] = None
    failed: Optional[str] = None


def y_glued_evidence(P: Poset) -> YGluedEvidence:
    if is_acyclic(P):
        return YGluedEvidence(False, failed="(a) acyclic")
    if not has_acyclic_extension(P):
        return YGluedEvidence(False, failed="(a) no acyclic extension")
    bips = maximal_bipartites(P)
    if len(bips) != 1:
        return YGluedEvidence(False, failed=f"(b) {len(bips)} maximal bipartite subgraphs")
    S_hat, S1_, S2_ = algorithm_ext(P, bips[0])
    ok1, ok2 = is_y_class(S1_), is_y_class(S2_)
    failed = None
    if not ok1:
        failed = "(c) lower piece not in Y-class"
    elif not ok2:
        failed = "(c) upper piece not in Y-class"
    return YGluedEvidence(failed is None, bips[0], S_hat, S1_, S2_, failed)


def is_y_glued_bipartite(P: Poset) -> Tuple[bool, YGluedEvidence]:
    ev = y_glued_evidence(P)
    return ev.holds, ev


@dataclass(frozen=True)
class WGluedEvidence:
    holds: bool
    diamond: Optional[Dict[str, str]] = None
    components: Dict[str, FrozenSet[str]] = field(default_factory=dict)
    failed: Optional[str] = None


def w_glued_evidence(P: Poset) -> WGluedEvidence:
    diamonds = hasse_diamonds(P)
    if len(diamonds) != 1:
        return WGluedEvidence(False, failed=f"(i) {len(diamonds)} diamonds in the Hasse diagram")
    dia = diamonds[0]
    for name, pat in (("S1", S1), ("dual S1", dual(S1)), ("S4hat", S4_HAT)):
        if contains_induced(P, pat):
            return WGluedEvidence(False, dia, failed=f"(ii) induced {name}")
    a, b, c, d = dia["a"], dia["b"], dia["c"], dia["d"]
    arcs = [(a, b), (a, c), (b, d), (c, d)]
    if not all(e in P.covers for e in arcs):
        return WGluedEvidence(False, dia, failed="(iii) diamond relations are not covers")
    comps = P.components(arcs)
    where = {}
    for v in (a, b, c, d):
        where[v] = next(comp for comp in comps if v in comp)
    if len(set(where.values())) != 4:
        return WGluedEvidence(False, dia, failed="(iii) diamond corners joined outside the diamond")
    for comp in comps:
        if not is_w_class(induced(P, comp)):
            return WGluedEvidence(False, dia, failed="(iii) component not in W-class")
    named = {"a": where[a], "b": where[b], "c": where[c], "d": where[d]}
    return WGluedEvidence(True, dia, named)


def is_w_glued_diamond(P: Poset) -> Tuple[bool, WGluedEvidence]:
    ev = w_glued_evidence(P)
    return ev.holds, ev


# -- verdict --------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    kind: str
    evidence: object = None
    reason: str = ""

    @property
    def equivalence(self) -> bool:
        return self.kind != FAILS


def verdict(P: Poset) -> Verdict:
    if not P.is_connected():
        raise PosetError("verdict needs a connected poset")
    if is_acyclic(P):
        return Verdict(ACYCLIC)
    if has_acyclic_extension(P):
        ev = y_glued_evidence(P)
        if ev.holds:
            return Verdict(Y_GLUED, ev)
        return Verdict(FAILS, ev, f"Y-glued bipartite {ev.failed}")
    ev = w_glued_evidence(P)
    if ev.holds:
        return Verdict(W_GLUED, ev)
    return Verdict(FAILS, ev, f"W-glued diamond {ev.failed}")

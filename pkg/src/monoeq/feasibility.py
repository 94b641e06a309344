"""Realizability, weak realizability and ordered couplings, decided by exact LP."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from .lp import OPTIMAL, LinearProgram, lp_feasible, solve
from .measures import (
    ZERO,
    MassMismatch,
    MeasureError,
    MeasureSystem,
    NotAcyclic,
    RationalMeasure,
    _same_support,
    measure,
    monotonicity_violation,
)
from .poset import MAP_BOUND, MonotoneMap, Poset, UnknownElement, glue, induced, monotone_value_tuples

__all__ = [
    "MapDistribution",
    "MarginalMismatch",
    "NotStochasticallyMonotone",
    "PairCoupling",
    "glue_realizations",
    "is_realizably_monotone",
    "lp_feasible",
    "max_theta",
    "max_theta_witness",
    "realize_acyclic",
    "strassen_lp",
]


class NotStochasticallyMonotone(MeasureError):
    pass


class MarginalMismatch(MeasureError):
    pass


@dataclass(frozen=True)
class MapDistribution:
    """Nonnegative weights on monotone maps ``index -> support``.

    Keys are value tuples in ``index.elements`` order.
    """

    index: Poset
    support: Poset
    weights: Tuple[Tuple[Tuple[str, ...], Fraction], ...]

    @classmethod
    def build(cls, index: Poset, support: Poset, weights: Mapping[Tuple[str, ...], Fraction]) -> "MapDistribution":
        acc: Dict[Tuple[str, ...], Fraction] = defaultdict(Fraction)
        for k, w in weights.items():
            if w < 0:
                raise MeasureError("negative map weight")
            if w:
                acc[tuple(k)] += Fraction(w)
        return cls(index, support, tuple(sorted(acc.items())))

    @property
    def total(self) -> Fraction:
        return sum((w for _, w in self.weights), ZERO)

    def maps(self) -> List[Tuple[MonotoneMap, Fraction]]:
        return [(MonotoneMap(self.index, self.support, k), w) for k, w in self.weights]

    def all_monotone(self) -> bool:
        return all(h.is_monotone() for h, _ in self.maps())

    def marginal(self, alpha: str) -> RationalMeasure:
        i = self.index._i(alpha)
        acc: Dict[str, Fraction] = defaultdict(Fraction)
        for k, w in self.weights:
            acc[k[i]] += w
        return measure(self.support, acc)

    def marginals(self) -> MeasureSystem:
        return MeasureSystem(self.index, self.support, tuple(self.marginal(a) for a in self.index.elements))

    def realizes(self, S: MeasureSystem) -> bool:
        """Exact marginal match and monotone support."""
        if S.index != self.index or S.support != self.support:
            return False
        return self.all_monotone() and all(self.marginal(a) == m for a, m in S.items())

    def restrict(self, sub: Iterable[str]) -> "MapDistribution":
        """Push forward to the induced sub-index."""
        A = induced(self.index, sub)
        pos = [self.index._i(a) for a in A.elements]
        acc: Dict[Tuple[str, ...], Fraction] = defaultdict(Fraction)
        for k, w in self.weights:
            acc[tuple(k[p] for p in pos)] += w
        return MapDistribution.build(A, self.support, acc)


@dataclass(frozen=True)
class PairCoupling:
    """Weights on pairs (x, y) of the support."""

    support: Poset
    weights: Tuple[Tuple[Tuple[str, str], Fraction], ...]

    def first(self) -> RationalMeasure:
        acc: Dict[str, Fraction] = defaultdict(Fraction)
        for (x, _), w in self.weights:
            acc[x] += w
        return measure(self.support, acc)

    def second(self) -> RationalMeasure:
        acc: Dict[str, Fraction] = defaultdict(Fraction)
        for (_, y), w in self.weights:
            acc[y] += w
        return measure(self.support, acc)

    def is_ordered(self) -> bool:
        return all(self.support.leq(x, y) for (x, y), _ in self.weights)


# -- realizability -----------------------------------------------------------------

_map_tuples = lru_cache(maxsize=128)(monotone_value_tuples)


def _marginal_rows(S: MeasureSystem, maps: List[Tuple[str, ...]]):
    """(alpha, x, {column: 1}) for every index alpha and support element x.

    Each index's rows sum to the same total-weight row, so past the first
    index the last support element's row is implied and left out.
    """
    idx = S.index
    out = []
    last = S.support.elements[-1]
    for i, a in enumerate(idx.elements):
        by_value: Dict[str, Dict[int, int]] = defaultdict(dict)
        for k, t in enumerate(maps):
            by_value[t[i]][k] = 1
        for x in S.support.elements:
            if i and x == last:
                continue
            out.append((a, x, by_value.get(x, {})))
    return out


def _check_index(S: MeasureSystem) -> None:
    for a in S.index.elements:
        if a not in S.support:
            raise UnknownElement(f"index {a!r} is not an element of the support")
    if induced(S.support, S.index.elements) != S.index:
        raise MeasureError("index poset is not the induced subposet of the support")


def is_realizably_monotone(S: MeasureSystem, bound: int = MAP_BOUND) -> Optional[MapDistribution]:
    """A law on monotone maps with the given marginals, or None if none exists."""
    S.total
    maps = _map_tuples(S.index, S.support, bound)
    lp = LinearProgram(len(maps))
    for a, x, row in _marginal_rows(S, maps):
        rhs = S[a](x)
        if not row:
            if rhs:
                return None
            continue
        lp.add_eq(row, rhs)
    x = lp_feasible(lp)
    if x is None:
        return None
    return MapDistribution.build(S.index, S.support, {maps[k]: v for k, v in enumerate(x) if v})


def max_theta_witness(S: MeasureSystem, bound: int = MAP_BOUND) -> Tuple[Fraction, MapDistribution]:
    """Largest theta in [0, 1] with theta*P + (1-theta)*I realizable, and a realizing law."""
    _check_index(S)
    p = S.total
    maps = _map_tuples(S.index, S.support, bound)
    t = len(maps)
    lp = LinearProgram(t + 1)
    for a, x, row in _marginal_rows(S, maps):
        ident = p if a == x else ZERO
        coef = S[a](x) - ident
        r = dict(row)
        if coef:
            r[t] = -coef
        if not r:
            if ident:
                raise MeasureError("no map can take the identity value")  # pragma: no cover
            continue
        lp.add_eq(r, ident)
    lp.add_le({t: 1}, 1)
    lp.objective = {t: 1}
    res = solve(lp)
    if res.status != OPTIMAL:  # pragma: no cover - theta = 0 is always feasible
        raise RuntimeError(f"weak realizability LP returned {res.status}")
    law = MapDistribution.build(S.index, S.support, {maps[k]: v for k, v in enumerate(res.x[:t]) if v})
    return res.x[t], law


def max_theta(S: MeasureSystem, bound: int = MAP_BOUND) -> Fraction:
    return max_theta_witness(S, bound)[0]


# -- couplings ------------------------------------------------------------------------


def strassen_lp(p1: RationalMeasure, p2: RationalMeasure) -> Optional[PairCoupling]:
    """A coupling on {x <= y} with marginals p1, p2, or None."""
    _same_support(p1, p2)
    if p1.total != p2.total:
        raise MassMismatch(f"total masses differ: {p1.total} vs {p2.total}")
    S = p1.poset
    pairs = sorted(S.relation())
    lp = LinearProgram(len(pairs))
    for x in S.elements:
        lp.add_eq({k: 1 for k, (u, _) in enumerate(pairs) if u == x}, p1(x))
        lp.add_eq({k: 1 for k, (_, v) in enumerate(pairs) if v == x}, p2(x))
    sol = lp_feasible(lp)
    if sol is None:
        return None
    return PairCoupling(S, tuple((pairs[k], v) for k, v in enumerate(sol) if v))


def glue_realizations(d1: MapDistribution, d2: MapDistribution, alpha: str) -> MapDistribution:
    """Conditional product of two laws that share the index ``alpha``."""
    if d1.support != d2.support:
        raise MeasureError("laws on different supports")
    A = glue(d1.index, d2.index, alpha)
    m1, m2 = d1.marginal(alpha), d2.marginal(alpha)
    if m1 != m2:
        raise MarginalMismatch(f"marginals at {alpha!r} differ")
    i1, i2 = d1.index._i(alpha), d2.index._i(alpha)
    by_value: Dict[str, List[Tuple[Tuple[str, ...], Fraction]]] = defaultdict(list)
    for k, w in d2.weights:
        by_value[k[i2]].append((k, w))
    pos = []
    for a in A.elements:
        if a in d1.index:
            pos.append((0, d1.index._i(a)))
        else:
            pos.append((1, d2.index._i(a)))
    acc: Dict[Tuple[str, ...], Fraction] = defaultdict(Fraction)
    for k1, w1 in d1.weights:
        x = k1[i1]
        for k2, w2 in by_value[x]:
            key = tuple(k1[j] if side == 0 else k2[j] for side, j in pos)
            acc[key] += w1 * w2 / m1(x)
    return MapDistribution.build(A, d1.support, acc)


def _point_law(S: MeasureSystem, alpha: str) -> MapDistribution:
    A = induced(S.index, [alpha])
    return MapDistribution.build(A, S.support, {(x,): w for x, w in S[alpha].as_dict().items()})


def _edge_law(S: MeasureSystem, lo: str, hi: str) -> MapDistribution:
    c = strassen_lp(S[lo], S[hi])
    if c is None:  # pragma: no cover - excluded by the monotonicity check
        raise NotStochasticallyMonotone(f"P_{lo} is not below P_{hi}")
    A = induced(S.index, [lo, hi])
    flip = A.elements[0] != lo
    return MapDistribution.build(A, S.support, {((y, x) if flip else (x, y)): w for (x, y), w in c.weights})


def realize_acyclic(S: MeasureSystem) -> MapDistribution:
    """Edge-by-edge ordered couplings glued along a tree-shaped index."""
    A = S.index
    if not (A.is_connected() and len(A.covers) == len(A) - 1):
        raise NotAcyclic("index poset is not a tree")
    if monotonicity_violation(S) is not None:
        raise NotStochasticallyMonotone("system is not stochastically monotone")
    root = A.elements[0]
    law = _point_law(S, root)
    done = {root}
    queue = [root]
    for u in queue:
        for v in sorted(A.neighbours(u)):
            if v in done:
                continue
            edge = _edge_law(S, u, v) if A.lt(u, v) else _edge_law(S, v, u)
            law = glue_realizations(law, edge, u)
            done.add(v)
            queue.append(v)
    return law

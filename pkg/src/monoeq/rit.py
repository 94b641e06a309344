"""Recursive inverse transforms on rooted trees.

A tree is cut into maximal non-branching paths, indexed by a plane tree.  Given
a mass function ``mu`` on that index tree which sandwiches a distribution
function along every path, a piecewise-constant map on ``[0, mu(root))`` is
built recursively: children's transforms are laid side by side, and the top
part of the interval walks up the path.  Everything is exact interval
arithmetic over rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from .classify import is_w_class
from .feasibility import MapDistribution, NotStochasticallyMonotone
from .measures import (
    ZERO,
    DistributionFunction,
    MeasureError,
    MeasureSystem,
    RootedTree,
    df_from_values,
    df_stoch_leq,
    distribution_function,
    system_is_stoch_monotone,
)
from .poset import Poset, PosetError, induced

Piece = Tuple[Fraction, Fraction, str]


class RitError(MeasureError):
    pass


class NotInterlaced(RitError):
    pass


class NotOrdered(RitError):
    pass


class BadIndex(RitError):
    pass


class NotWClass(PosetError):
    pass


class NoExtremes(PosetError):
    pass


# -- piecewise constant maps ---------------------------------------------------------


@dataclass(frozen=True)
class InverseTransform:
    """A map from ``[0, length)`` to poset elements, constant on each piece."""

    length: Fraction
    pieces: Tuple[Piece, ...]

    def __post_init__(self):
        cur = ZERO
        for lo, hi, _ in self.pieces:
            if lo != cur or hi <= lo:
                raise RitError(f"pieces do not tile [0, {self.length}) at {lo}")
            cur = hi
        if cur != self.length:
            raise RitError(f"pieces end at {cur}, expected {self.length}")

    @classmethod
    def from_pieces(cls, length, pieces: Iterable[Piece]) -> "InverseTransform":
        """Drop empty pieces and merge neighbours with the same value."""
        out: List[List] = []
        for lo, hi, x in pieces:
            if hi <= lo:
                continue
            if out and out[-1][2] == x and out[-1][1] == lo:
                out[-1][1] = hi
            else:
                out.append([Fraction(lo), Fraction(hi), x])
        return cls(Fraction(length), tuple((lo, hi, x) for lo, hi, x in out))

    def __call__(self, omega) -> str:
        omega = Fraction(omega)
        for lo, hi, x in self.pieces:
            if lo <= omega < hi:
                return x
        raise ValueError(f"{omega} outside [0, {self.length})")

    def breakpoints(self) -> List[Fraction]:
        return [lo for lo, _, _ in self.pieces]

    def preimage(self, xs: Iterable[str]) -> List[Tuple[Fraction, Fraction]]:
        want = set(xs)
        return _merge([(lo, hi) for lo, hi, x in self.pieces if x in want])

    def measure_of(self, xs: Iterable[str]) -> Fraction:
        return sum((hi - lo for lo, hi in self.preimage(xs)), ZERO)

    def shifted(self, offset) -> List[Piece]:
        return [(lo + offset, hi + offset, x) for lo, hi, x in self.pieces]

    def replace(self, intervals: Iterable[Tuple[Fraction, Fraction]], value: str) -> "InverseTransform":
        """Same map but ``value`` on the given intervals."""
        cuts = sorted({ZERO, self.length, *self.breakpoints(), *(e for iv in intervals for e in iv)})
        ivs = _merge(list(intervals))
        out = []
        for lo, hi in zip(cuts, cuts[1:]):
            if any(a <= lo and hi <= b for a, b in ivs):
                out.append((lo, hi, value))
            else:
                out.append((lo, hi, self(lo)))
        return InverseTransform.from_pieces(self.length, out)

    def text(self) -> List[str]:
        return [f"[{_q(lo)}, {_q(hi)}) -> {x}" for lo, hi, x in self.pieces]


def _q(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _merge(ivs: List[Tuple[Fraction, Fraction]]) -> List[Tuple[Fraction, Fraction]]:
    out: List[List[Fraction]] = []
    for lo, hi in sorted(ivs):
        if hi <= lo:
            continue
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(a, b) for a, b in out]


def concat(parts: Sequence[InverseTransform]) -> InverseTransform:
    """Lay transforms side by side."""
    pieces: List[Piece] = []
    off = ZERO
    for p in parts:
        pieces += p.shifted(off)
        off += p.length
    return InverseTransform.from_pieces(off, pieces)


def common_cuts(family: Iterable[InverseTransform]) -> List[Fraction]:
    family = list(family)
    length = family[0].length
    if any(X.length != length for X in family):
        raise RitError("transforms have different domains")
    return sorted({length, *(b for X in family for b in X.breakpoints())})


def pointwise_ordered(family: Mapping[str, InverseTransform], index: Poset, support: Poset) -> bool:
    """X_alpha <= X_beta on every piece of the common refinement when alpha <= beta."""
    cuts = common_cuts(family.values())
    for lo in cuts[:-1]:
        vals = {a: X(lo) for a, X in family.items()}
        for a, b in index.covers:
            if not support.leq(vals[a], vals[b]):
                return False
    return True


def to_map_distribution(family: Mapping[str, InverseTransform], index: Poset, support: Poset) -> MapDistribution:
    """Read the family along its common refinement; each piece is one map."""
    cuts = common_cuts(family.values())
    acc: Dict[Tuple[str, ...], Fraction] = {}
    for lo, hi in zip(cuts, cuts[1:]):
        key = tuple(family[a](lo) for a in index.elements)
        acc[key] = acc.get(key, ZERO) + (hi - lo)
    return MapDistribution.build(index, support, acc)


# -- plane tree of paths --------------------------------------------------------------


@dataclass(frozen=True)
class PlaneNode:
    kappa: int
    path: Tuple[str, ...]
    children: Tuple[int, ...]
    parent: Optional[int]
    vertices: FrozenSet[str]
    ext: Optional[str]

    @property
    def terminated(self) -> bool:
        return not self.children

    @property
    def head(self) -> str:
        return self.path[0]

    @property
    def tail(self) -> str:
        return self.path[-1]

    @property
    def u_hat(self) -> Tuple[str, ...]:
        return ((self.ext,) if self.ext is not None else ()) + self.path


class PlaneTreeIndex:
    """Paths of a rooted tree indexed by a plane tree with root 1 (preorder numbering).

    A path also stops at any vertex in ``breaks``; the glued constructions use
    this to end a path at a diamond corner.
    """

    def __init__(self, T: RootedTree, breaks: Iterable[str] = ()):
        self.tree = T
        self.breaks = frozenset(breaks)
        self.nodes: Dict[int, PlaneNode] = {}
        self._counter = 0
        self._build(T.root, None, None)

    def _build(self, head: str, parent: Optional[int], ext: Optional[str]) -> int:
        T = self.tree
        self._counter += 1
        kappa = self._counter
        path = [head]
        while len(T.children[path[-1]]) == 1 and path[-1] not in self.breaks:
            path.append(T.children[path[-1]][0])
        self.nodes[kappa] = None  # reserve preorder slot
        kids = []
        for c in sorted(T.children[path[-1]]):
            kids.append(self._build(c, kappa, path[-1]))
        self.nodes[kappa] = PlaneNode(
            kappa, tuple(path), tuple(kids), parent, frozenset(T.section(head)), ext
        )
        return kappa

    def __iter__(self):
        return iter(sorted(self.nodes))

    def __getitem__(self, kappa: int) -> PlaneNode:
        if kappa not in self.nodes:
            raise BadIndex(f"no index {kappa}")
        return self.nodes[kappa]

    def extended_tree(self, kappa: int) -> RootedTree:
        """W^(kappa) plus the parent's tail vertex, rooted there (the whole tree at 1)."""
        node = self[kappa]
        if node.ext is None:
            return self.tree
        sub = induced(self.tree.tree, node.vertices | {node.ext})
        return RootedTree(sub, node.ext)

    def subtree_indices(self, kappa: int) -> List[int]:
        out = [kappa]
        for k in out:
            out.extend(self[k].children)
        return sorted(out)


def build_plane_tree(T: RootedTree, breaks: Iterable[str] = ()) -> PlaneTreeIndex:
    return PlaneTreeIndex(T, breaks)


# -- interlaced mass on the index tree -------------------------------------------------


@dataclass(frozen=True)
class InterlacedDistribution:
    K: PlaneTreeIndex
    mu: Dict[int, Fraction]

    def __call__(self, kappa: int) -> Fraction:
        return self.mu[kappa]

    def minus(self, kappa: int) -> Fraction:
        return sum((self.mu[s] for s in self.K[kappa].children), ZERO)

    def ceil(self, kappa: int, sigma: int) -> Fraction:
        kids = self.K[kappa].children
        return sum((self.mu[s] for s in kids[: kids.index(sigma) + 1]), ZERO)

    def floor(self, kappa: int, sigma: int) -> Fraction:
        kids = self.K[kappa].children
        return sum((self.mu[s] for s in kids[: kids.index(sigma)]), ZERO)

    def interlace_failure(self, F: DistributionFunction, kappa: int = 1) -> Optional[str]:
        """Why mu is not interlaced with F on the subtree at kappa, or None."""
        if kappa == 1 and self.mu[1] != F(self.K.tree.root):
            return f"mu(1)={self.mu[1]} but F(root)={F(self.K.tree.root)}"
        for k in self.K.subtree_indices(kappa):
            node = self.K[k]
            chain = (self.minus(k), F(node.tail), F(node.head), self.mu[k])
            if not chain[0] <= chain[1] <= chain[2] <= chain[3]:
                return f"index {k}: mu(-)={chain[0]}, F(tail)={chain[1]}, F(head)={chain[2]}, mu={chain[3]}"
        return None


def interlaced_mu(Fa: DistributionFunction, Fd: DistributionFunction, K: PlaneTreeIndex) -> InterlacedDistribution:
    """mu(kappa) = max(Fa(head), Fd(head)) for Fa below Fd."""
    if not df_stoch_leq(Fa, Fd):
        raise NotOrdered("the lower distribution function is not below the upper one")
    return InterlacedDistribution(K, {k: max(Fa(n.head), Fd(n.head)) for k, n in K.nodes.items()})


def extend_F(F: DistributionFunction, K: PlaneTreeIndex, mu: InterlacedDistribution, kappa: int) -> DistributionFunction:
    """F on W^(kappa), and mu(kappa) at the parent's tail vertex."""
    node = K[kappa]
    if node.ext is None:
        return F
    T = K.extended_tree(kappa)
    vals = {x: F(x) for x in node.vertices}
    vals[node.ext] = mu(kappa)
    return df_from_values(T, vals)


def build_rit(mu: InterlacedDistribution, F: DistributionFunction, K: PlaneTreeIndex, kappa: int = 1) -> InverseTransform:
    """The recursive inverse transform from ``[0, mu(kappa))`` onto the extended subtree."""
    why = mu.interlace_failure(F, kappa)
    if why is not None:
        raise NotInterlaced(why)
    return InverseTransform.from_pieces(mu(kappa), _rit(mu, F, K, kappa))


def _rit(mu: InterlacedDistribution, F: DistributionFunction, K: PlaneTreeIndex, kappa: int) -> List[Piece]:
    node = K[kappa]
    pieces: List[Piece] = []
    off = ZERO
    for s in node.children:
        pieces += [(lo + off, hi + off, x) for lo, hi, x in _rit(mu, F, K, s)]
        off += mu(s)
    # walk up the extended path, deepest first
    levels = [(F(u), u) for u in reversed(node.path)]
    if node.ext is not None:
        levels.append((mu(kappa), node.ext))
    cur = off
    for level, u in levels:
        if level > cur:
            pieces.append((cur, level, u))
            cur = level
    return pieces


def closed_form_tail_preimage(mu: InterlacedDistribution, F: DistributionFunction, K: PlaneTreeIndex, kappa: int) -> List[Tuple[Fraction, Fraction]]:
    """The set where the transform at kappa hits the tail of its path, from the closed form."""
    node = K[kappa]
    ivs = [(mu.minus(kappa), F(node.tail))]
    for s in node.children:
        base = mu.floor(kappa, s)
        ivs.append((base + F(K[s].head), base + mu(s)))
    return _merge(ivs)


def realizes(X: InverseTransform, F: DistributionFunction) -> bool:
    """Length of the preimage of every closed section equals F there."""
    T = F.tree
    return all(X.measure_of(T.section(x)) == F(x) for x in T.tree.elements)


# -- W-class systems --------------------------------------------------------------------


@dataclass(frozen=True)
class WRealization:
    tree: RootedTree
    K: PlaneTreeIndex
    mu: InterlacedDistribution
    F: Dict[str, DistributionFunction]
    X: Dict[str, InverseTransform]

    def map_distribution(self, index: Poset) -> MapDistribution:
        return to_map_distribution(self.X, index, self.tree.tree)


def default_root(W: Poset) -> str:
    return W.maximal()[0]


def w_class_realize(S: MeasureSystem, root: Optional[str] = None, breaks: Iterable[str] = ()) -> WRealization:
    """Transforms for every index sharing one mu built from the extreme indices."""
    W, A = S.support, S.index
    if not is_w_class(W):
        raise NotWClass("support poset is not in W-class")
    mins, maxs = A.minimal(), A.maximal()
    if len(mins) != 1 or len(maxs) != 1:
        raise NoExtremes("index poset needs a minimum and a maximum")
    a, d = mins[0], maxs[0]
    if not system_is_stoch_monotone(S):
        raise NotStochasticallyMonotone("system is not stochastically monotone")
    root = default_root(W) if root is None else root
    if root not in W.minimal() and root not in W.maximal():
        raise PosetError("the root must be a minimal or maximal element")
    T = RootedTree(W, root)
    for v in breaks:
        if v not in W.minimal() and v not in W.maximal():
            raise PosetError(f"paths may only be cut at extremal elements, not {v!r}")
    K = build_plane_tree(T, breaks)
    F = {alpha: distribution_function(S[alpha], T) for alpha in A.elements}
    mu = interlaced_mu(F[a], F[d], K)
    X = {alpha: build_rit(mu, F[alpha], K, 1) for alpha in A.elements}
    return WRealization(T, K, mu, F, X)

"""Exact rational measures on posets, stochastic order and rooted-tree distribution functions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from .poset import Poset, PosetError, UnknownElement, up_set_masks

ZERO = Fraction(0)
ONE = Fraction(1)


class MeasureError(ValueError):
    pass


class MassMismatch(MeasureError):
    pass


class SupportMismatch(MeasureError):
    pass


class ThetaOutOfRange(MeasureError):
    pass


class NotAcyclic(PosetError):
    pass


@dataclass(frozen=True)
class RationalMeasure:
    """Nonnegative rational masses on the elements of ``poset``.

    ``masses`` follows ``poset.elements``; build with :func:`measure`.
    """

    poset: Poset
    masses: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.masses) != len(self.poset):
            raise SupportMismatch("mass vector length differs from poset size")
        if any(m < 0 for m in self.masses):
            raise MeasureError("negative mass")

    def __call__(self, x: str) -> Fraction:
        return self.masses[self.poset._i(x)]

    @property
    def total(self) -> Fraction:
        return sum(self.masses, ZERO)

    def of(self, xs: Iterable[str]) -> Fraction:
        return sum((self(x) for x in xs), ZERO)

    def of_mask(self, m: int) -> Fraction:
        out = ZERO
        i = 0
        while m:
            if m & 1:
                out += self.masses[i]
            m >>= 1
            i += 1
        return out

    def support(self) -> List[str]:
        return [x for x, m in zip(self.poset.elements, self.masses) if m]

    def as_dict(self) -> Dict[str, Fraction]:
        return {x: m for x, m in zip(self.poset.elements, self.masses) if m}

    def __add__(self, other: "RationalMeasure") -> "RationalMeasure":
        _same_support(self, other)
        return RationalMeasure(self.poset, tuple(a + b for a, b in zip(self.masses, other.masses)))

    def scale(self, t) -> "RationalMeasure":
        t = Fraction(t)
        return RationalMeasure(self.poset, tuple(t * m for m in self.masses))

    def minus(self, other: "RationalMeasure") -> "RationalMeasure":
        """Difference; raises MeasureError if it would go negative."""
        _same_support(self, other)
        return RationalMeasure(self.poset, tuple(a - b for a, b in zip(self.masses, other.masses)))

    def restrict(self, sub: Poset) -> "RationalMeasure":
        """Masses on the elements of ``sub`` (mass elsewhere is dropped)."""
        return RationalMeasure(sub, tuple(self(x) for x in sub.elements))

    def push(self, big: Poset) -> "RationalMeasure":
        """The same masses viewed on a larger poset."""
        return measure(big, self.as_dict())


def measure(P: Poset, masses: Mapping[str, object]) -> RationalMeasure:
    for x in masses:
        if x not in P:
            raise UnknownElement(f"unknown element {x!r}")
    return RationalMeasure(P, tuple(Fraction(masses.get(x, 0)) for x in P.elements))


def unit(P: Poset, x: str) -> RationalMeasure:
    """The unit mass I_x."""
    return measure(P, {x: 1})


def uniform_on(P: Poset, xs: Iterable[str], total=1) -> RationalMeasure:
    """Mass ``total/len(xs)`` at each listed element."""
    xs = list(xs)
    return measure(P, {x: Fraction(total) / len(xs) for x in xs})


def indicator(P: Poset, xs: Iterable[str], weight=1) -> RationalMeasure:
    """``weight * I_U``: mass ``weight`` at each element of U."""
    return measure(P, {x: Fraction(weight) for x in xs})


def zero(P: Poset) -> RationalMeasure:
    return RationalMeasure(P, tuple(ZERO for _ in P.elements))


def _same_support(p: RationalMeasure, q: RationalMeasure) -> None:
    if p.poset != q.poset:
        raise SupportMismatch("measures live on different posets")


def witness_up_set(p: RationalMeasure, q: RationalMeasure) -> Optional[frozenset]:
    """An up-set U with p(U) > q(U), or None when p is below q."""
    _same_support(p, q)
    if p.total != q.total:
        raise MassMismatch(f"total masses differ: {p.total} vs {q.total}")
    for m in up_set_masks(p.poset):
        if p.of_mask(m) > q.of_mask(m):
            return p.poset.unmask(m)
    return None


def stoch_leq(p: RationalMeasure, q: RationalMeasure) -> bool:
    return witness_up_set(p, q) is None


@dataclass(frozen=True)
class MeasureSystem:
    """Measures indexed by the elements of ``index``, all on ``support``."""

    index: Poset
    support: Poset
    family: Tuple[RationalMeasure, ...]

    def __post_init__(self):
        if len(self.family) != len(self.index):
            raise SupportMismatch("one measure per index element is required")
        for m in self.family:
            if m.poset != self.support:
                raise SupportMismatch("all members must share the support poset")

    def __getitem__(self, alpha: str) -> RationalMeasure:
        return self.family[self.index._i(alpha)]

    def items(self):
        return zip(self.index.elements, self.family)

    @property
    def total(self) -> Fraction:
        totals = {m.total for m in self.family}
        if len(totals) != 1:
            raise MassMismatch(f"members have different totals: {sorted(totals)}")
        return totals.pop()

    def with_index(self, index: Poset) -> "MeasureSystem":
        return MeasureSystem(index, self.support, tuple(self[a] for a in index.elements))


def system(index: Poset, support: Poset, family: Mapping[str, RationalMeasure]) -> MeasureSystem:
    missing = set(index.elements) - set(family)
    if missing:
        raise SupportMismatch(f"no measure for {sorted(missing)}")
    return MeasureSystem(index, support, tuple(family[a] for a in index.elements))


def kernel(S: Poset, rows: Mapping[str, Mapping[str, object]]) -> MeasureSystem:
    """A transition kernel on S, i.e. a system indexed by S itself."""
    return system(S, S, {x: measure(S, rows[x]) for x in S.elements})


def monotonicity_violation(S: MeasureSystem) -> Optional[Tuple[str, str, frozenset]]:
    """A cover pair alpha < beta and up-set U with P_alpha(U) > P_beta(U)."""
    S.total
    for a, b in S.index.edges():
        U = witness_up_set(S[a], S[b])
        if U is not None:
            return a, b, U
    return None


def system_is_stoch_monotone(S: MeasureSystem) -> bool:
    # covers suffice: the stochastic order is transitive
    return monotonicity_violation(S) is None


def weak_combination(S: MeasureSystem, theta) -> MeasureSystem:
    """theta * P_alpha + (1 - theta) * I_alpha for each index alpha."""
    theta = Fraction(theta)
    if not 0 < theta <= 1:
        raise ThetaOutOfRange(f"theta={theta} is outside (0, 1]")
    return mix_identity(S, theta)


def mix_identity(S: MeasureSystem, theta) -> MeasureSystem:
    """Like :func:`weak_combination` but allows theta = 0."""
    theta = Fraction(theta)
    for a in S.index.elements:
        if a not in S.support:
            raise UnknownElement(f"index {a!r} is not an element of the support")
    fam = tuple(
        m.scale(theta) + unit(S.support, a).scale((1 - theta) * m.total)
        for a, m in S.items()
    )
    return MeasureSystem(S.index, S.support, fam)


# -- rooted trees ---------------------------------------------------------------


class RootedTree:
    """An acyclic poset with a root; ``x <=_tau y`` iff y lies on the path from the root to x."""

    def __init__(self, tree: Poset, root: str):
        if root not in tree:
            raise UnknownElement(f"unknown root {root!r}")
        if not (tree.is_connected() and len(tree.covers) == len(tree) - 1):
            raise NotAcyclic("a rooted tree needs an acyclic connected poset")
        self.tree = tree
        self.root = root
        self.parent: Dict[str, Optional[str]] = {root: None}
        self.depth: Dict[str, int] = {root: 0}
        self.children: Dict[str, List[str]] = {x: [] for x in tree.elements}
        order = [root]
        for x in order:
            for y in sorted(tree.neighbours(x)):
                if y not in self.parent:
                    self.parent[y] = x
                    self.depth[y] = self.depth[x] + 1
                    self.children[x].append(y)
                    order.append(y)
        self.bfs = order

    def __eq__(self, other) -> bool:
        return isinstance(other, RootedTree) and self.tree == other.tree and self.root == other.root

    def __hash__(self) -> int:
        return hash((self.tree, self.root))

    def path_to_root(self, x: str) -> List[str]:
        out = [x]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])
        return out

    def tree_leq(self, x: str, y: str) -> bool:
        return y in self.path_to_root(x)

    def section(self, x: str) -> List[str]:
        """(<-, x]: x and everything whose root path passes through x."""
        out = [x]
        for v in out:
            out.extend(self.children[v])
        return sorted(out)

    def section_is_down_set(self, x: str) -> bool:
        p = self.parent[x]
        return p is None or self.tree.lt(x, p)

    def section_is_up_set(self, x: str) -> bool:
        p = self.parent[x]
        return p is None or self.tree.lt(p, x)


@dataclass(frozen=True)
class DistributionFunction:
    """F(x) = P((<-, x]) and F(x-) = P((<-, x)) on a rooted tree."""

    tree: RootedTree
    F: Dict[str, Fraction]
    F_minus: Dict[str, Fraction]

    def __call__(self, x: str) -> Fraction:
        return self.F[x]

    def minus(self, x: str) -> Fraction:
        return self.F_minus[x]

    @property
    def total(self) -> Fraction:
        return self.F[self.tree.root]

    def point_mass(self, x: str) -> Fraction:
        return self.F[x] - self.F_minus[x]

    def measure(self) -> RationalMeasure:
        return measure(self.tree.tree, {x: self.point_mass(x) for x in self.tree.tree.elements})


def distribution_function(P: RationalMeasure, T: RootedTree) -> DistributionFunction:
    if P.poset.elements != T.tree.elements:
        raise SupportMismatch("measure and tree have different vertex sets")
    F: Dict[str, Fraction] = {}
    Fm: Dict[str, Fraction] = {}
    for x in reversed(T.bfs):
        below = sum((F[c] for c in T.children[x]), ZERO)
        Fm[x] = below
        F[x] = below + P(x)
    return DistributionFunction(T, F, Fm)


def df_from_values(T: RootedTree, F: Mapping[str, Fraction]) -> DistributionFunction:
    """A distribution function given directly by its values F(x)."""
    Fm = {x: sum((Fraction(F[c]) for c in T.children[x]), ZERO) for x in T.tree.elements}
    out = DistributionFunction(T, {x: Fraction(F[x]) for x in T.tree.elements}, Fm)
    for x in T.tree.elements:
        if out.point_mass(x) < 0:
            raise MeasureError(f"F({x}) < F({x}-)")
    return out


def df_stoch_leq(F: DistributionFunction, G: DistributionFunction) -> bool:
    """Section-wise order: F >= G on down-set sections and F <= G on up-set sections."""
    if F.tree != G.tree:
        raise SupportMismatch("distribution functions on different rooted trees")
    if F.total != G.total:
        raise MassMismatch(f"total masses differ: {F.total} vs {G.total}")
    T = F.tree
    for x in T.tree.elements:
        if x == T.root:
            continue
        if T.section_is_down_set(x):
            if F(x) < G(x):
                return False
        elif F(x) > G(x):
            return False
    return True

"""Finite posets given by their Hasse diagrams.

Elements are opaque strings.  Every enumeration in this module follows the
lexicographic order of element names so that results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple


class PosetError(ValueError):
    pass


class DirectedCycle(PosetError):
    pass


class RedundantCover(PosetError):
    pass


class UnknownElement(PosetError):
    pass


class BadIntersection(PosetError):
    pass


class SizeLimit(RuntimeError):
    pass


#: default cap on the number of monotone maps enumerated in one call
MAP_BOUND = 200_000


def _closure(n: int, succ: List[int]) -> List[int]:
    """Reflexive-transitive closure of a DAG given as successor bitmasks.

    Raises DirectedCycle when the graph is not acyclic.
    """
    up = [0] * n
    state = [0] * n  # 0 new, 1 on stack, 2 done

    def visit(i: int) -> int:
        if state[i] == 2:
            return up[i]
        if state[i] == 1:
            raise DirectedCycle("cover relation contains a directed cycle")
        state[i] = 1
        mask = 1 << i
        s = succ[i]
        while s:
            low = s & -s
            j = low.bit_length() - 1
            mask |= visit(j)
            s ^= low
        up[i] = mask
        state[i] = 2
        return mask

    for i in range(n):
        visit(i)
    return up


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Poset:
    """Immutable finite poset.

    ``up[i]`` is the bitmask of elements ``>= elements[i]``, ``down[i]`` the
    bitmask of elements ``<= elements[i]``.  Use :func:`from_cover_edges` or
    :meth:`from_order` to build one.
    """

    elements: Tuple[str, ...]
    covers: FrozenSet[Tuple[str, str]]
    up: Tuple[int, ...] = field(repr=False, compare=False)
    down: Tuple[int, ...] = field(repr=False, compare=False)
    index: Dict[str, int] = field(repr=False, compare=False, hash=False)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_order(cls, elements: Iterable[str], up_sets: Dict[str, Iterable[str]]) -> "Poset":
        """Build from a full order; ``up_sets[x]`` lists every y with x <= y."""
        elems = tuple(sorted(set(elements)))
        idx = {x: i for i, x in enumerate(elems)}
        n = len(elems)
        up = [1 << i for i in range(n)]
        for x, ys in up_sets.items():
            for y in ys:
                up[idx[x]] |= 1 << idx[y]
        down = [0] * n
        for i in range(n):
            for j in _bits(up[i]):
                down[j] |= 1 << i
        covers = set()
        for i in range(n):
            strict = up[i] & ~(1 << i)
            for j in _bits(strict):
                between = strict & down[j] & ~(1 << j)
                if not between:
                    covers.add((elems[i], elems[j]))
        return cls(elems, frozenset(covers), tuple(up), tuple(down), idx)

    # -- order queries ----------------------------------------------------

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x: object) -> bool:
        return x in self.index

    def __iter__(self) -> Iterator[str]:
        return iter(self.elements)

    def _i(self, x: str) -> int:
        try:
            return self.index[x]
        except KeyError:
            raise UnknownElement(f"unknown element {x!r}") from None

    def leq(self, x: str, y: str) -> bool:
        return bool(self.up[self._i(x)] >> self._i(y) & 1)

    def lt(self, x: str, y: str) -> bool:
        return x != y and self.leq(x, y)

    def comparable(self, x: str, y: str) -> bool:
        return self.leq(x, y) or self.leq(y, x)

    def mask(self, xs: Iterable[str]) -> int:
        m = 0
        for x in xs:
            m |= 1 << self._i(x)
        return m

    def unmask(self, m: int) -> FrozenSet[str]:
        return frozenset(self.elements[i] for i in _bits(m))

    def upper(self, x: str) -> FrozenSet[str]:
        """All y with x <= y."""
        return self.unmask(self.up[self._i(x)])

    def lower(self, x: str) -> FrozenSet[str]:
        return self.unmask(self.down[self._i(x)])

    def upper_covers(self, x: str) -> List[str]:
        return sorted(y for (a, y) in self.covers if a == x)

    def lower_covers(self, x: str) -> List[str]:
        return sorted(a for (a, y) in self.covers if y == x)

    def neighbours(self, x: str) -> List[str]:
        return sorted(set(self.upper_covers(x)) | set(self.lower_covers(x)))

    def minimal(self) -> List[str]:
        return [x for i, x in enumerate(self.elements) if self.down[i] == 1 << i]

    def maximal(self) -> List[str]:
        return [x for i, x in enumerate(self.elements) if self.up[i] == 1 << i]

    def relation(self) -> FrozenSet[Tuple[str, str]]:
        """The full order as a set of pairs (x, y) with x <= y."""
        return frozenset(
            (x, self.elements[j]) for i, x in enumerate(self.elements) for j in _bits(self.up[i])
        )

    def is_up_set(self, xs: Iterable[str]) -> bool:
        m = self.mask(xs)
        return all(self.up[i] & ~m == 0 for i in _bits(m))

    def is_down_set(self, xs: Iterable[str]) -> bool:
        m = self.mask(xs)
        return all(self.down[i] & ~m == 0 for i in _bits(m))

    def linear_extension(self) -> List[str]:
        """Canonical linear extension: repeatedly take the smallest minimal name."""
        remaining = set(self.elements)
        out = []
        while remaining:
            x = min(y for y in remaining if not any(self.lt(z, y) for z in remaining))
            out.append(x)
            remaining.remove(x)
        return out

    # -- Hasse diagram ----------------------------------------------------

    def edges(self) -> List[Tuple[str, str]]:
        return sorted(self.covers)

    def components(self, removed_edges: Iterable[Tuple[str, str]] = ()) -> List[FrozenSet[str]]:
        """Connected components of the undirected Hasse diagram minus some edges."""
        gone = {frozenset(e) for e in removed_edges}
        adj: Dict[str, set] = {x: set() for x in self.elements}
        for x, y in self.covers:
            if frozenset((x, y)) in gone:
                continue
            adj[x].add(y)
            adj[y].add(x)
        seen: set = set()
        comps = []
        for x in self.elements:
            if x in seen:
                continue
            stack, comp = [x], set()
            while stack:
                v = stack.pop()
                if v in comp:
                    continue
                comp.add(v)
                stack.extend(adj[v] - comp)
            seen |= comp
            comps.append(frozenset(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self) <= 1 or len(self.components()) == 1

    def __str__(self) -> str:
        return f"Poset({' '.join(self.elements)}; {', '.join(f'{x}<{y}' for x, y in self.edges())})"


def from_cover_edges(elements: Iterable[str], covers: Iterable[Tuple[str, str]]) -> Poset:
    """Validated poset from a Hasse diagram; ``(x, y)`` means y covers x."""
    elems = tuple(sorted(set(elements)))
    idx = {x: i for i, x in enumerate(elems)}
    n = len(elems)
    succ = [0] * n
    pairs = set()
    for x, y in covers:
        for z in (x, y):
            if z not in idx:
                raise UnknownElement(f"cover ({x}, {y}) uses unknown element {z!r}")
        if x == y:
            raise DirectedCycle(f"self-cover at {x!r}")
        succ[idx[x]] |= 1 << idx[y]
        pairs.add((x, y))
    up = _closure(n, succ)
    for x, y in pairs:
        i, j = idx[x], idx[y]
        # y covers x iff no other successor of x reaches y
        for k in _bits(succ[i] & ~(1 << j)):
            if up[k] >> j & 1:
                raise RedundantCover(f"cover ({x}, {y}) is implied through {elems[k]!r}")
    down = [0] * n
    for i in range(n):
        for j in _bits(up[i]):
            down[j] |= 1 << i
    return Poset(elems, frozenset(pairs), tuple(up), tuple(down), idx)


def chain(*names: str) -> Poset:
    return from_cover_edges(names, zip(names, names[1:]))


# -- derived posets --------------------------------------------------------


def induced(P: Poset, subset: Iterable[str]) -> Poset:
    """Order of P restricted to ``subset``; covers are recomputed."""
    sub = sorted(set(subset))
    for x in sub:
        P._i(x)
    return Poset.from_order(sub, {x: [y for y in sub if P.leq(x, y)] for x in sub})


def dual(P: Poset) -> Poset:
    return from_cover_edges(P.elements, [(y, x) for x, y in P.covers])


def relabel(P: Poset, mapping: Dict[str, str]) -> Poset:
    return from_cover_edges([mapping[x] for x in P.elements], [(mapping[x], mapping[y]) for x, y in P.covers])


def glue(P1: Poset, P2: Poset, shared: str) -> Poset:
    """Union of two Hasse diagrams sharing exactly the vertex ``shared``."""
    common = set(P1.elements) & set(P2.elements)
    if common != {shared}:
        raise BadIntersection(f"posets must intersect exactly in {{{shared}}}, got {sorted(common)}")
    return from_cover_edges(set(P1.elements) | set(P2.elements), set(P1.covers) | set(P2.covers))


# -- up-sets ----------------------------------------------------------------


def antichains(P: Poset) -> List[int]:
    """All antichains as bitmasks (including the empty one)."""
    n = len(P)
    comparable = [P.up[i] | P.down[i] for i in range(n)]
    out: List[int] = []

    def grow(start: int, current: int, blocked: int) -> None:
        out.append(current)
        for i in range(start, n):
            if not blocked >> i & 1:
                grow(i + 1, current | 1 << i, blocked | comparable[i])

    grow(0, 0, 0)
    return out


def up_set_masks(P: Poset) -> List[int]:
    """Up-sets as bitmasks, generated from their minimal antichains."""
    masks = set()
    for a in antichains(P):
        m = 0
        for i in _bits(a):
            m |= P.up[i]
        masks.add(m)
    return sorted(masks, key=lambda m: (bin(m).count("1"), sorted(P.unmask(m))))


def up_sets(P: Poset) -> List[FrozenSet[str]]:
    """Every up-set of P, ordered by size then by sorted member names."""
    return [P.unmask(m) for m in up_set_masks(P)]


# -- embeddings and maps ----------------------------------------------------


def find_induced(P: Poset, pattern: Poset) -> List[Dict[str, str]]:
    """All order-embeddings of ``pattern`` into P (x <= y iff f(x) <= f(y))."""
    pat = pattern.linear_extension()
    k = len(pat)
    found: List[Dict[str, str]] = []
    assign: Dict[str, str] = {}

    def extend(pos: int) -> None:
        if pos == k:
            found.append(dict(assign))
            return
        x = pat[pos]
        used = set(assign.values())
        for y in P.elements:
            if y in used:
                continue
            ok = True
            for x2, y2 in assign.items():
                if pattern.leq(x2, x) != P.leq(y2, y) or pattern.leq(x, x2) != P.leq(y, y2):
                    ok = False
                    break
            if ok:
                assign[x] = y
                extend(pos + 1)
                del assign[x]

    extend(0)
    found.sort(key=lambda f: [f[x] for x in pattern.elements])
    return found


def contains_induced(P: Poset, pattern: Poset) -> bool:
    return bool(find_induced(P, pattern))


def is_isomorphic(P: Poset, Q: Poset) -> bool:
    return len(P) == len(Q) and len(P.covers) == len(Q.covers) and contains_induced(P, Q)


@dataclass(frozen=True)
class MonotoneMap:
    """An order-preserving map; ``values`` follows ``domain.elements``."""

    domain: Poset
    codomain: Poset
    values: Tuple[str, ...]

    def __call__(self, x: str) -> str:
        return self.values[self.domain.index[x]]

    def as_dict(self) -> Dict[str, str]:
        return dict(zip(self.domain.elements, self.values))

    def is_identity(self) -> bool:
        return self.domain.elements == self.codomain.elements and self.values == self.domain.elements

    def is_monotone(self) -> bool:
        return all(self.codomain.leq(self(x), self(y)) for x, y in self.domain.covers)

    def compose(self, other: "MonotoneMap") -> "MonotoneMap":
        """``self`` after ``other``."""
        return MonotoneMap(other.domain, self.codomain, tuple(self(v) for v in other.values))


def monotone_value_tuples(A: Poset, S: Poset, bound: int = MAP_BOUND) -> List[Tuple[str, ...]]:
    """Value tuples (in ``A.elements`` order) of all monotone maps A -> S.

    Enumeration is lexicographic in the values listed along ``A.elements``.
    Raises SizeLimit when more than ``bound`` maps exist.
    """
    order = A.linear_extension()
    pos = {x: i for i, x in enumerate(order)}
    lower = [[pos[y] for y in A.lower_covers(x)] for x in order]
    n = len(S)
    full = (1 << n) - 1
    vals = [0] * len(order)
    raw: List[Tuple[int, ...]] = []

    def extend(k: int) -> None:
        if k == len(order):
            raw.append(tuple(vals))
            if len(raw) > bound:
                raise SizeLimit(f"more than {bound} monotone maps from {len(A)} to {len(S)} elements")
            return
        cand = full
        for j in lower[k]:
            cand &= S.up[vals[j]]
        for v in _bits(cand):
            vals[k] = v
            extend(k + 1)

    extend(0)
    perm = [pos[x] for x in A.elements]
    out = [tuple(S.elements[r[p]] for p in perm) for r in raw]
    out.sort()
    return out


def monotone_maps(A: Poset, S: Poset, bound: int = MAP_BOUND) -> List[MonotoneMap]:
    return [MonotoneMap(A, S, t) for t in monotone_value_tuples(A, S, bound)]


def identity_map(S: Poset) -> MonotoneMap:
    return MonotoneMap(S, S, S.elements)


# -- canonical forms ----------------------------------------------------------


def canonical_form(P: Poset) -> Tuple[int, Tuple[Tuple[int, int], ...]]:
    """Isomorphism-invariant key: lexicographically least relabelled cover list.

    Candidates are limited to permutations that respect a degree signature, so
    this stays cheap for the desk-scale posets the package works with.
    """
    n = len(P)
    sig = {}
    for i, x in enumerate(P.elements):
        sig[x] = (
            bin(P.down[i]).count("1"),
            bin(P.up[i]).count("1"),
            len(P.lower_covers(x)),
            len(P.upper_covers(x)),
        )
    groups: Dict[tuple, List[str]] = {}
    for x in P.elements:
        groups.setdefault(sig[x], []).append(x)
    keys = sorted(groups)
    best: Optional[Tuple[Tuple[int, int], ...]] = None

    def orders(k: int) -> Iterator[List[str]]:
        if k == len(keys):
            yield []
            return
        for perm in permutations(groups[keys[k]]):
            for rest in orders(k + 1):
                yield list(perm) + rest

    for order in orders(0):
        lab = {x: i for i, x in enumerate(order)}
        cand = tuple(sorted((lab[x], lab[y]) for x, y in P.covers))
        if best is None or cand < best:
            best = cand
    return n, best or ()


def from_canonical(key: Tuple[int, Tuple[Tuple[int, int], ...]], names: Sequence[str] = "abcdefghijklmnop") -> Poset:
    n, edges = key
    return from_cover_edges(names[:n], [(names[i], names[j]) for i, j in edges])

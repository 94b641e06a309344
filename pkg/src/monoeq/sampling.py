"""Seeded random posets, measures, kernels and generators for property checks.

Everything returned is exact rational.  Vertices of the stochastically
monotone polytope are found in floating point, snapped to nearby rationals and
then verified exactly; anything that fails verification is discarded.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .classify import W_GLUED, DIAMOND, is_w_class, verdict
from .markov import Generator, generator
from .measures import (
    MeasureSystem,
    RationalMeasure,
    kernel,
    measure,
    system,
    system_is_stoch_monotone,
)
from .poset import Poset, from_cover_edges, up_set_masks


def random_weights(rng: random.Random, n: int, total=1, top: int = 6, sparsity: float = 0.0) -> List[Fraction]:
    """n nonnegative rationals summing to ``total`` (not all zero)."""
    while True:
        raw = [0 if rng.random() < sparsity else rng.randint(0, top) for _ in range(n)]
        s = sum(raw)
        if s:
            return [Fraction(total) * r / s for r in raw]


def random_measure(P: Poset, rng: random.Random, total=1, sparsity: float = 0.3) -> RationalMeasure:
    w = random_weights(rng, len(P), total, sparsity=sparsity)
    return RationalMeasure(P, tuple(w))


def random_monotone_map(A: Poset, S: Poset, rng: random.Random, tries: int = 50) -> Optional[Dict[str, str]]:
    """Assign values along a linear extension, each uniformly among the admissible ones."""
    order = A.linear_extension()
    for _ in range(tries):
        val: Dict[str, str] = {}
        ok = True
        for x in order:
            cand = set(S.elements)
            for y in A.lower_covers(x):
                cand &= S.upper(val[y])
            if not cand:
                ok = False
                break
            val[x] = rng.choice(sorted(cand))
        if ok:
            return val
    return None


def random_map_mixture(A: Poset, S: Poset, rng: random.Random, k: int = 3) -> MeasureSystem:
    """Marginals of a random mixture of monotone maps (always realizable)."""
    maps = []
    for _ in range(k):
        h = random_monotone_map(A, S, rng)
        if h is not None:
            maps.append(h)
    if not maps:
        maps = [{a: a for a in A.elements}]
    w = random_weights(rng, len(maps))
    fam = {}
    for a in A.elements:
        acc: Dict[str, Fraction] = {}
        for h, wi in zip(maps, w):
            acc[h[a]] = acc.get(h[a], Fraction(0)) + wi
        fam[a] = measure(S, acc)
    return system(A, S, fam)


def sm_vertex(A: Poset, S: Poset, rng: random.Random, limit: int = 10_000) -> Optional[MeasureSystem]:
    """A random vertex of the polytope of stochastically monotone systems, or None."""
    import numpy as np
    from scipy.optimize import linprog

    n, m = len(S), len(A)
    nv = n * m
    ups = [u for u in up_set_masks(S) if u and u != (1 << n) - 1]
    A_ub, b_ub = [], []
    for lo, hi in A.edges():
        i, j = A._i(lo), A._i(hi)
        for u in ups:
            row = np.zeros(nv)
            for k in range(n):
                if (u >> k) & 1:
                    row[i * n + k] += 1
                    row[j * n + k] -= 1
            A_ub.append(row)
            b_ub.append(0.0)
    A_eq = np.zeros((m, nv))
    for i in range(m):
        A_eq[i, i * n:(i + 1) * n] = 1
    c = np.array([rng.uniform(-1, 1) for _ in range(nv)])
    # caps below 1 push the vertex away from deterministic maps
    cap = rng.choice([1.0, 0.5, 0.5, 1 / 3])
    res = linprog(
        c,
        A_ub=np.array(A_ub) if A_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=A_eq,
        b_eq=np.ones(m),
        bounds=(0, cap),
        method="highs-ds",
    )
    if res.status != 0:
        return None
    fam = {}
    for i, a in enumerate(A.elements):
        vals = [Fraction(max(v, 0.0)).limit_denominator(limit) for v in res.x[i * n:(i + 1) * n]]
        s = sum(vals)
        if s == 0:
            return None
        vals = [v / s for v in vals]
        fam[a] = RationalMeasure(S, tuple(vals))
    out = system(A, S, fam)
    return out if system_is_stoch_monotone(out) else None


def mix(systems: Sequence[MeasureSystem], weights: Sequence[Fraction]) -> MeasureSystem:
    base = systems[0]
    fam = []
    for a in base.index.elements:
        acc = [Fraction(0)] * len(base.support)
        for s, w in zip(systems, weights):
            for k, v in enumerate(s[a].masses):
                acc[k] += w * v
        fam.append(RationalMeasure(base.support, tuple(acc)))
    return MeasureSystem(base.index, base.support, tuple(fam))


def random_sm_system(A: Poset, S: Poset, rng: random.Random) -> MeasureSystem:
    """A random stochastically monotone system, biased toward polytope vertices."""
    parts = []
    v = sm_vertex(A, S, rng)
    if v is not None:
        parts.append(v)
    if rng.random() < 0.5 or not parts:
        parts.append(random_map_mixture(A, S, rng))
    if len(parts) == 1:
        return parts[0]
    if rng.random() < 0.5:
        return parts[0]
    return mix(parts, random_weights(rng, len(parts), top=4))


def random_sm_kernel(S: Poset, rng: random.Random) -> MeasureSystem:
    return random_sm_system(S, S, rng)


def random_generator(S: Poset, rng: random.Random, monotone_bias: float = 0.5) -> Generator:
    """Half the time lam*(Q - I) for a monotone kernel Q, otherwise sparse random rates."""
    if len(S) < 2:
        raise ValueError("a generator needs at least two states")
    while True:
        rates: Dict[str, Dict[str, Fraction]] = {}
        if rng.random() < monotone_bias:
            Q = random_sm_kernel(S, rng)
            lam = Fraction(rng.randint(1, 4))
            for x in S.elements:
                rates[x] = {y: lam * Q[x](y) for y in S.elements if y != x and Q[x](y)}
        else:
            for x in S.elements:
                rates[x] = {
                    y: Fraction(rng.randint(1, 4), rng.randint(1, 3))
                    for y in S.elements
                    if y != x and rng.random() < 0.35
                }
        if any(rates[x] for x in S.elements):
            return generator(S, rates)


def random_ordered_pair(S: Poset, rng: random.Random, total=1) -> Tuple[RationalMeasure, RationalMeasure]:
    """Marginals of a random coupling supported on the order, hence P1 below P2."""
    pairs = sorted(S.relation())
    w = random_weights(rng, len(pairs), total, sparsity=0.6)
    p1: Dict[str, Fraction] = {}
    p2: Dict[str, Fraction] = {}
    for (x, y), wi in zip(pairs, w):
        p1[x] = p1.get(x, Fraction(0)) + wi
        p2[y] = p2.get(y, Fraction(0)) + wi
    return measure(S, p1), measure(S, p2)


# -- random posets ------------------------------------------------------------------


def random_oriented_tree(names: Sequence[str], rng: random.Random) -> Poset:
    names = list(names)
    covers = []
    for k in range(1, len(names)):
        other = names[rng.randrange(k)]
        covers.append((other, names[k]) if rng.random() < 0.5 else (names[k], other))
    return from_cover_edges(names, covers)


def random_w_class(max_elements: int, rng: random.Random, min_elements: int = 1) -> Poset:
    names = "efghijklmnop"
    while True:
        n = rng.randint(min_elements, max_elements)
        P = random_oriented_tree(names[:n], rng)
        if is_w_class(P):
            return P


def random_w_glued_diamond(max_elements: int, rng: random.Random) -> Poset:
    """Diamond a<b,c<d with random trees hanging at the corners, kept if W-glued."""
    extra = "efghijklmnop"
    while True:
        k = rng.randint(0, max_elements - 4)
        covers = list(DIAMOND.covers)
        names = ["a", "b", "c", "d"]
        for i in range(k):
            new = extra[i]
            other = rng.choice(names)
            covers.append((other, new) if rng.random() < 0.5 else (new, other))
            names.append(new)
        P = from_cover_edges(names, covers)
        if verdict(P).kind == W_GLUED:
            return P

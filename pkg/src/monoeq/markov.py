"""Continuous-time chains on posets: generators, uniformization and the two monotonicity tests."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from .lp import OPTIMAL, LinearProgram, solve
from .measures import ZERO, MeasureSystem, kernel, system_is_stoch_monotone
from .poset import MAP_BOUND, MonotoneMap, Poset, UnknownElement, monotone_value_tuples, up_set_masks


class GeneratorError(ValueError):
    pass


class ZeroGenerator(GeneratorError):
    pass


class LambdaTooSmall(GeneratorError):
    pass


@dataclass(frozen=True)
class Generator:
    """Rate matrix on ``poset``; ``rates[i][j]`` follows ``poset.elements`` and
    the diagonal makes every row sum to zero."""

    poset: Poset
    rates: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.poset)
        if len(self.rates) != n or any(len(r) != n for r in self.rates):
            raise GeneratorError("rate matrix has the wrong shape")
        for i, row in enumerate(self.rates):
            if any(v < 0 for j, v in enumerate(row) if j != i):
                raise GeneratorError(f"negative rate out of {self.poset.elements[i]}")
            if sum(row, ZERO) != 0:
                raise GeneratorError(f"row {self.poset.elements[i]} does not sum to zero")
        if self.lam_star == 0:
            raise ZeroGenerator("all exit rates are zero")

    def __call__(self, x: str, y: str) -> Fraction:
        return self.rates[self.poset._i(x)][self.poset._i(y)]

    def exit_rate(self, x: str) -> Fraction:
        return -self(x, x)

    @property
    def lam_star(self) -> Fraction:
        return max(-self.rates[i][i] for i in range(len(self.poset)))

    def to_set(self, x: str, m: int) -> Fraction:
        """L(x, U) for the bitmask U, diagonal included."""
        row = self.rates[self.poset._i(x)]
        return sum((row[j] for j in range(len(row)) if (m >> j) & 1), ZERO)

    def off_diagonal(self) -> Dict[str, Dict[str, Fraction]]:
        out: Dict[str, Dict[str, Fraction]] = {}
        for x in self.poset.elements:
            row = {y: self(x, y) for y in self.poset.elements if y != x and self(x, y)}
            out[x] = row
        return out


def generator(S: Poset, rates: Mapping[str, Mapping[str, object]]) -> Generator:
    """Build from off-diagonal rates ``{x: {y: L(x, y)}}``; the diagonal is computed."""
    n = len(S)
    mat = [[ZERO] * n for _ in range(n)]
    for x, row in rates.items():
        if x not in S:
            raise UnknownElement(f"unknown state {x!r}")
        i = S._i(x)
        for y, v in row.items():
            if y not in S:
                raise UnknownElement(f"unknown state {y!r}")
            j = S._i(y)
            if i == j:
                raise GeneratorError("diagonal rates are derived, not given")
            mat[i][j] = Fraction(v)
    for i in range(n):
        mat[i][i] = -sum((mat[i][j] for j in range(n) if j != i), ZERO)
    return Generator(S, tuple(tuple(r) for r in mat))


def default_rate(L: Generator) -> Fraction:
    return 2 * L.lam_star


def uniformize(L: Generator, lam=None) -> MeasureSystem:
    """Q(x, y) = I(x, y) + L(x, y) / lam as a kernel (system indexed by the states)."""
    lam = default_rate(L) if lam is None else Fraction(lam)
    if lam < L.lam_star or lam <= 0:
        raise LambdaTooSmall(f"lambda={lam} is below the maximal exit rate {L.lam_star}")
    S = L.poset
    rows = {}
    for x in S.elements:
        rows[x] = {y: int(x == y) + L(x, y) / lam for y in S.elements}
    return kernel(S, rows)


def massey_violation(L: Generator) -> Optional[Tuple[str, str, frozenset, str]]:
    """First failing (x, y, U, clause) of the two rate inequality families."""
    S = L.poset
    ups = up_set_masks(S)
    full = (1 << len(S)) - 1
    for x in S.elements:
        for y in sorted(S.upper(x)):
            if y == x:
                continue
            bx, by = 1 << S._i(x), 1 << S._i(y)
            for U in ups:
                if not U & by and L.to_set(x, U) > L.to_set(y, U):
                    return x, y, S.unmask(U), "i"
                if U & bx and L.to_set(x, full & ~U) < L.to_set(y, full & ~U):
                    return x, y, S.unmask(U), "ii"
    return None


def massey_check(L: Generator) -> bool:
    return massey_violation(L) is None


def sm_continuous(L: Generator, lam=None) -> bool:
    return system_is_stoch_monotone(uniformize(L, lam))


def decompose_generator(L: Generator, bound: int = MAP_BOUND) -> Optional[Dict[MonotoneMap, Fraction]]:
    """Nonnegative weights on non-identity monotone self-maps whose jump rates give L.

    Minimizes the total weight; returns None when no such weights exist.
    """
    S = L.poset
    maps = [t for t in monotone_value_tuples(S, S, bound) if t != S.elements]
    lp = LinearProgram(len(maps))
    for i, x in enumerate(S.elements):
        for y in S.elements:
            if y == x:
                continue
            row = {k: 1 for k, t in enumerate(maps) if t[i] == y}
            if not row:
                if L(x, y):
                    return None
                continue
            lp.add_eq(row, L(x, y))
    lp.objective = {k: -1 for k in range(len(maps))}
    res = solve(lp)
    if res.status != OPTIMAL:
        return None
    return {MonotoneMap(S, S, maps[k]): v for k, v in enumerate(res.x) if v}


def kernel_from_decomposition(S: Poset, gamma: Mapping[MonotoneMap, Fraction], lam=None) -> MeasureSystem:
    """Law of one step of the random map: weight gamma(h)/lam on h, the rest on id.

    With lam equal to the total weight the identity gets nothing.
    """
    total = sum(gamma.values(), ZERO)
    lam = total if lam is None else Fraction(lam)
    if lam < total or lam <= 0:
        raise LambdaTooSmall(f"lambda={lam} is below the total weight {total}")
    rows = {x: {y: ZERO for y in S.elements} for x in S.elements}
    for h, g in gamma.items():
        for x in S.elements:
            rows[x][h(x)] += g / lam
    for x in S.elements:
        rows[x][x] += 1 - total / lam
    return kernel(S, rows)


def ct_equivalence(P: Poset) -> bool:
    from .classify import FAILS, verdict

    return verdict(P).kind != FAILS


TIME_GRID = 2 ** 20


def simulate_path(L: Generator, x0: str, horizon, seed: int, lam=None) -> List[Tuple[Fraction, str]]:
    """Sample path as ``(time, state)`` events, one per clock ring, starting at ``(0, x0)``.

    The clock has rate lam (default: the maximal exit rate) and each ring
    moves by the uniformized kernel.  Times are rounded to a 2**-20 grid so the
    output stays rational and reproducible.
    """
    if x0 not in L.poset:
        raise UnknownElement(f"unknown state {x0!r}")
    horizon = Fraction(horizon)
    lam = L.lam_star if lam is None else Fraction(lam)
    Q = uniformize(L, lam)
    rng = random.Random(seed)
    events: List[Tuple[Fraction, str]] = [(Fraction(0), x0)]
    t = Fraction(0)
    x = x0
    while True:
        gap = Fraction(round(rng.expovariate(float(lam)) * TIME_GRID), TIME_GRID)
        t += gap
        if t > horizon:
            break
        u = Fraction(rng.getrandbits(53), 2 ** 53)
        acc = ZERO
        row = Q[x]
        nxt = x
        for y, m in zip(L.poset.elements, row.masses):
            acc += m
            if u < acc:
                nxt = y
                break
        x = nxt
        events.append((t, x))
    return events


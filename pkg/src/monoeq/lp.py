"""Exact rational linear programming.

A revised simplex method over exact rationals with Bland's rule, so every
solve terminates and returns an exact vertex or an exact verdict.  Inside the
solver rationals are ``gmpy2.mpq`` when available (same values, faster
arithmetic); inputs and outputs are :class:`fractions.Fraction`.
A floating-point solve (HiGHS through scipy) may be used to propose a
starting basis; that basis is only accepted after exact verification, so the
float path never decides anything on its own.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

log = logging.getLogger(__name__)

Row = Dict[int, Fraction]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """Variables ``0..n_vars-1``; nonnegative unless listed in ``free``.

    ``eqs`` holds rows ``sum coef*x == rhs``, ``les`` rows ``sum coef*x <= rhs``.
    ``objective`` (optional) is maximized.
    """

    n_vars: int
    eqs: List[Tuple[Row, Fraction]] = field(default_factory=list)
    les: List[Tuple[Row, Fraction]] = field(default_factory=list)
    objective: Optional[Row] = None
    free: Set[int] = field(default_factory=set)
    names: Optional[List[str]] = None

    def add_eq(self, row: Row, rhs) -> None:
        self.eqs.append((_clean(row), Fraction(rhs)))

    def add_le(self, row: Row, rhs) -> None:
        self.les.append((_clean(row), Fraction(rhs)))

    def add_ge(self, row: Row, rhs) -> None:
        self.les.append(({j: -v for j, v in _clean(row).items()}, -Fraction(rhs)))

    def check(self, x: Sequence[Fraction]) -> bool:
        """Exact feasibility test of a candidate point."""
        if len(x) != self.n_vars:
            return False
        if any(x[j] < 0 for j in range(self.n_vars) if j not in self.free):
            return False
        for row, rhs in self.eqs:
            if sum(v * x[j] for j, v in row.items()) != rhs:
                return False
        for row, rhs in self.les:
            if sum(v * x[j] for j, v in row.items()) > rhs:
                return False
        return True

    def value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((v * x[j] for j, v in (self.objective or {}).items()), Fraction(0))


def _clean(row) -> Row:
    return {int(j): Fraction(v) for j, v in row.items() if v != 0}


@dataclass
class LPResult:
    status: str
    x: Optional[List[Fraction]] = None
    value: Optional[Fraction] = None
    iterations: int = 0


class _Standard:
    """min c.x, A x = b, x >= 0, b >= 0 with sparse columns."""

    def __init__(self, lp: LinearProgram):
        cols: List[Row] = []
        cost: List[Fraction] = []
        self.back: List[Tuple[int, int]] = []  # (original var, sign)
        obj = lp.objective or {}
        colof: Dict[int, List[int]] = {}
        for j in range(lp.n_vars):
            signs = (1, -1) if j in lp.free else (1,)
            for s in signs:
                colof.setdefault(j, []).append(len(cols))
                cols.append({})
                cost.append(_Q(-s * obj.get(j, Fraction(0))))
                self.back.append((j, s))
        rows: List[Tuple[Row, Fraction]] = list(lp.eqs)
        n_eq = len(rows)
        rows += list(lp.les)
        self.b: List[Fraction] = []
        for r, (row, rhs) in enumerate(rows):
            flip = -1 if rhs < 0 else 1
            self.b.append(_Q(flip * rhs))
            for j, v in row.items():
                for k, c in enumerate(colof[j]):
                    s = self.back[c][1]
                    cols[c][r] = _Q(flip * s * v)
            if r >= n_eq:
                cols.append({r: _Q(flip)})
                cost.append(_Q(0))
                self.back.append((-1, 0))
        self.m = len(rows)
        self.n = len(cols)
        self.cols = cols
        self.cost = cost
        self.n_orig = lp.n_vars

    def original(self, x) -> List[Fraction]:
        out = [_Q(0)] * self.n_orig
        for c, (j, s) in enumerate(self.back):
            if j >= 0:
                out[j] += s * x[c]
        return [Fraction(int(v.numerator), int(v.denominator)) for v in out]


class _Simplex:
    def __init__(self, std: _Standard):
        self.std = std
        m = std.m
        self.m = m
        # artificial column for row r is std.n + r
        self.basis = [std.n + r for r in range(m)]
        self.binv = [[_Q(int(i == j)) for j in range(m)] for i in range(m)]
        self.xb = list(std.b)
        self.iterations = 0

    def column(self, j: int) -> Row:
        if j >= self.std.n:
            return {j - self.std.n: _Q(1)}
        return self.std.cols[j]

    def ftran(self, j: int) -> List[Fraction]:
        col = self.column(j)
        return [sum((bi[r] * v for r, v in col.items()), _Q(0)) for bi in self.binv]

    def pivot(self, p: int, j: int, u: List[Fraction]) -> None:
        up = u[p]
        rowp = [v / up for v in self.binv[p]]
        xp = self.xb[p] / up
        for i in range(self.m):
            if i == p:
                continue
            f = u[i]
            if f:
                bi = self.binv[i]
                for k in range(self.m):
                    if rowp[k]:
                        bi[k] -= f * rowp[k]
                self.xb[i] -= f * xp
        self.binv[p] = rowp
        self.xb[p] = xp
        self.basis[p] = j
        self.iterations += 1

    def warm_start(self, hint: Sequence[int], keep: Sequence[int] = ()) -> bool:
        """Pivot hinted columns into the basis; keep it only if primal feasible.

        Artificials of the rows in ``keep`` are displaced last.
        """
        saved = ([r[:] for r in self.binv], self.xb[:], self.basis[:], self.iterations)
        keep = set(keep)
        for j in hint:
            u = self.ftran(j)
            rows = [i for i in range(self.m) if self.basis[i] >= self.std.n and u[i] != 0]
            if not rows:
                continue
            rows.sort(key=lambda i: self.basis[i] - self.std.n in keep)
            self.pivot(rows[0], j, u)
        if all(v >= 0 for v in self.xb):
            return True
        self.binv, self.xb, self.basis, self.iterations = saved
        return False

    def run(self, cost: list, allow: int) -> str:
        """Optimize with Bland's rule; columns >= ``allow`` never enter."""
        m = self.m
        zero = _Q(0)
        while True:
            cb = [cost[b] if b < len(cost) else zero for b in self.basis]
            y = [sum((cb[i] * self.binv[i][k] for i in range(m) if cb[i]), zero) for k in range(m)]
            inbasis = set(self.basis)
            enter = -1
            for j in range(allow):
                if j in inbasis:
                    continue
                d = cost[j] - sum((y[r] * v for r, v in self.std.cols[j].items()), zero)
                if d < 0:
                    enter = j
                    break
            if enter < 0:
                return OPTIMAL
            u = self.ftran(enter)
            best = None
            for i in range(m):
                if u[i] > 0:
                    ratio = self.xb[i] / u[i]
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return UNBOUNDED
            self.pivot(best[1], enter, u)

    def drive_out_artificials(self) -> None:
        n = self.std.n
        for i in range(self.m):
            if self.basis[i] < n:
                continue
            inbasis = set(self.basis)
            row = {r: v for r, v in enumerate(self.binv[i]) if v}
            for j in range(n):
                if j in inbasis:
                    continue
                v = sum((row[r] * a for r, a in self.std.cols[j].items() if r in row), _Q(0))
                if v != 0:
                    self.pivot(i, j, self.ftran(j))
                    break

    def solution(self) -> list:
        x = [_Q(0)] * self.std.n
        for i, b in enumerate(self.basis):
            if b < self.std.n:
                x[b] = self.xb[i]
        return x


@dataclass
class _Hint:
    support: List[int]
    keep: List[int]
    farkas: Optional[List[float]] = None
    duals: Optional[List[float]] = None


def _float_hint(std: _Standard) -> Optional[_Hint]:
    """Support of a HiGHS vertex, plus the rows whose artificial stays basic.

    An infeasible problem is re-solved in phase-one form; its duals are a
    candidate Farkas certificate.
    """
    try:
        import numpy as np
        from scipy.optimize import linprog
        from scipy.sparse import csc_matrix, hstack, identity
    except ImportError:  # pragma: no cover
        return None
    if std.m == 0 or std.n == 0:
        return None
    data, rows, cols = [], [], []
    for j, col in enumerate(std.cols):
        for r, v in col.items():
            data.append(float(v))
            rows.append(r)
            cols.append(j)
    A = csc_matrix((data, (rows, cols)), shape=(std.m, std.n))
    b = np.array([float(v) for v in std.b])
    try:
        res = linprog(np.array([float(c) for c in std.cost]), A_eq=A, b_eq=b, bounds=(0, None), method="highs-ds")
        if res.status == 2:
            c1 = np.concatenate([np.zeros(std.n), np.ones(std.m)])
            A1 = hstack([A, identity(std.m, format="csc")], format="csc")
            res = linprog(c1, A_eq=A1, b_eq=b, bounds=(0, None), method="highs-ds")
    except Exception as exc:  # pragma: no cover - float path is advisory only
        log.debug("float hint failed: %s", exc)
        return None
    if res.status != 0 or res.x is None:
        return None
    hint = [j for j in range(std.n) if res.x[j] > 1e-9]
    keep = [r for r in range(std.m) if len(res.x) > std.n and res.x[std.n + r] > 1e-9]
    duals = list(res.eqlin.marginals)
    if keep:
        return _Hint(hint, keep, farkas=duals)
    return _Hint(hint, keep, duals=duals)


def _rounded(y: Sequence[float]):
    for den in (10 ** 3, 10 ** 6):
        yield [_Q(Fraction(v).limit_denominator(den)) for v in y]


def _farkas_holds(std: _Standard, y: Sequence[float]) -> bool:
    """Exact check of y.A <= 0 < y.b after rounding y to small rationals."""
    for yq in _rounded(y):
        if sum((yq[r] * v for r, v in enumerate(std.b)), _Q(0)) <= 0:
            continue
        if all(sum((yq[r] * v for r, v in col.items()), _Q(0)) <= 0 for col in std.cols):
            return True
    return False


def _dual_certifies(std: _Standard, y: Sequence[float], value) -> bool:
    """Exact check that rounded duals are feasible and match the primal value."""
    for yq in _rounded(y):
        if sum((yq[r] * v for r, v in enumerate(std.b)), _Q(0)) != value:
            continue
        if all(sum((yq[r] * v for r, v in col.items()), _Q(0)) <= c for col, c in zip(std.cols, std.cost)):
            return True
    return False


def solve(lp: LinearProgram, use_hint: bool = True) -> LPResult:
    """Solve exactly; status is 'optimal', 'infeasible' or 'unbounded'."""
    std = _Standard(lp)
    spx = _Simplex(std)
    hint = None
    if use_hint:
        hint = _float_hint(std)
        if hint and hint.farkas is not None and _farkas_holds(std, hint.farkas):
            return LPResult(INFEASIBLE)
        if hint and hint.support:
            spx.warm_start(hint.support, hint.keep)
    n = std.n
    phase1 = [_Q(0)] * n + [_Q(1)] * std.m
    if any(spx.xb[i] for i, b in enumerate(spx.basis) if b >= n):
        spx.run(phase1, n)
    infeas = sum((spx.xb[i] for i, b in enumerate(spx.basis) if b >= n), _Q(0))
    if infeas > 0:
        return LPResult(INFEASIBLE, iterations=spx.iterations)
    spx.drive_out_artificials()
    xs = spx.solution()
    certified = False
    if hint and hint.duals is not None:
        certified = _dual_certifies(std, hint.duals, sum((c * v for c, v in zip(std.cost, xs)), _Q(0)))
    if not certified:
        status = spx.run(std.cost + [_Q(0)] * std.m, n)
        if status == UNBOUNDED:
            return LPResult(UNBOUNDED, iterations=spx.iterations)
        xs = spx.solution()
    x = std.original(xs)
    return LPResult(OPTIMAL, x, lp.value(x), spx.iterations)


def lp_feasible(lp: LinearProgram, use_hint: bool = True) -> Optional[List[Fraction]]:
    """An exact feasible point, or None when the constraints are infeasible."""
    plain = LinearProgram(lp.n_vars, lp.eqs, lp.les, None, lp.free, lp.names)
    res = solve(plain, use_hint)
    return res.x if res.status == OPTIMAL else None

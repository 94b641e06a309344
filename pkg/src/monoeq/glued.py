"""Constructive realizations on Y-glued bipartite posets and W-glued diamonds.

Y-glued: the bipartite block is replaced by a middle vertex, a midpoint
measure is found by exact LP, and the resulting acyclic system is realized
by glued couplings.

W-glued: the mass is split into a part living on ``W_a + W_d`` and two
branch systems on ``W_b + {a, d}`` and ``W_c + {a, d}``.  Each part gets a
recursive inverse transform; in the branches some corner-valued intervals are
then reassigned to ``a`` (or to ``d`` when the branch hangs below its
corner).  Every output is re-verified exactly before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .classify import w_glued_evidence, y_glued_evidence
from .feasibility import (
    MapDistribution,
    NotStochasticallyMonotone,
    glue_realizations,
    realize_acyclic,
)
from .lp import LinearProgram, lp_feasible
from .measures import (
    ZERO,
    DistributionFunction,
    MassMismatch,
    MeasureError,
    MeasureSystem,
    RationalMeasure,
    RootedTree,
    df_from_values,
    measure,
    stoch_leq,
    system,
    system_is_stoch_monotone,
    unit,
)
from .poset import Poset, PosetError, chain, induced, up_set_masks
from .rit import (
    InverseTransform,
    NotOrdered,
    Piece,
    WRealization,
    _merge,
    concat,
    pointwise_ordered,
    to_map_distribution,
    w_class_realize,
)


class NotYGluedBipartite(PosetError):
    pass


class NotWGluedDiamond(PosetError):
    pass


class MidpointInfeasible(RuntimeError):
    """A midpoint that must exist was not found; this is a bug, not bad input."""


class HypothesisViolated(MeasureError):
    pass


def _nonneg_measure(P: Poset, masses: Dict[str, Fraction], what: str) -> RationalMeasure:
    for x, v in masses.items():
        if v < 0:
            raise HypothesisViolated(f"{what} has negative mass {v} at {x!r}")
    return measure(P, masses)


def _marginals_match(X: InverseTransform, m: RationalMeasure) -> bool:
    if X.length != m.total:
        return False
    return all(X.measure_of([y]) == m(y) for y in m.poset.elements)


# -- Y-glued bipartite ----------------------------------------------------------------


@dataclass(frozen=True)
class YExtension:
    theta: Fraction
    system: MeasureSystem
    S_hat: Poset
    S1: Poset
    S2: Poset
    c: str
    Q1: MeasureSystem
    Q2: MeasureSystem
    p_c: Fraction


def _midpoint(lows: Sequence[RationalMeasure], highs: Sequence[RationalMeasure], total: Fraction) -> RationalMeasure:
    """A measure above every ``lows`` member and below every ``highs`` member."""
    P = lows[0].poset
    n = len(P)
    lp = LinearProgram(n)
    lp.add_eq({i: 1 for i in range(n)}, total)
    for U in up_set_masks(P):
        if U == 0 or U == (1 << n) - 1:
            continue
        row = {i: 1 for i in range(n) if (U >> i) & 1}
        lp.add_ge(row, max(m.of_mask(U) for m in lows))
        lp.add_le(row, min(m.of_mask(U) for m in highs))
    x = lp_feasible(lp)
    if x is None:
        raise MidpointInfeasible("no midpoint between the bipartite sides")
    return RationalMeasure(P, tuple(x))


def extend_bipartite(S: MeasureSystem) -> YExtension:
    """Add the middle vertex c of the acyclic extension and a measure for it."""
    ev = y_glued_evidence(S.support)
    if not ev.holds:
        raise NotYGluedBipartite(ev.failed or "support is not Y-glued bipartite")
    if not system_is_stoch_monotone(S):
        raise NotStochasticallyMonotone("system is not stochastically monotone")
    lower, upper = ev.bipartite
    for x in lower + upper:
        if x not in S.index:
            raise NotYGluedBipartite(f"index lacks bipartite element {x!r}")
    S_hat, S1, S2 = ev.S_hat, ev.S1, ev.S2
    c = (set(S1.elements) & set(S2.elements)).pop()
    p = S.total
    A_hat = induced(S_hat, list(lower) + list(upper) + [c])

    def side(piece: Poset) -> Tuple[MeasureSystem, RationalMeasure]:
        rest = [y for y in piece.elements if y != c]
        fam = {}
        for x in lower + upper:
            vals = {y: S[x](y) for y in rest}
            vals[c] = p - S[x].of(rest)
            fam[x] = _nonneg_measure(piece, vals, f"Q_{x}")
        mid = _midpoint([fam[x] for x in lower], [fam[x] for x in upper], p)
        fam[c] = mid
        return system(A_hat, piece, fam), mid

    Q1, m1 = side(S1)
    Q2, m2 = side(S2)
    rest1 = [y for y in S1.elements if y != c]
    rest2 = [y for y in S2.elements if y != c]
    p_c = m1.of(rest1) + m2.of(rest2)
    theta = p / p_c if p_c > p else Fraction(1)
    vals = {y: theta * m1(y) for y in rest1}
    vals.update({y: theta * m2(y) for y in rest2})
    vals[c] = p - theta * p_c
    P_c = measure(S_hat, vals)
    index = induced(S_hat, list(S.index.elements) + [c])
    fam = {c: P_c}
    for x in S.index.elements:
        fam[x] = S[x].push(S_hat).scale(theta) + unit(S_hat, x).scale((1 - theta) * p)
    out = system(index, S_hat, fam)
    if not system_is_stoch_monotone(out):  # pragma: no cover - guaranteed by the construction
        raise MidpointInfeasible("extended system is not stochastically monotone")
    return YExtension(theta, out, S_hat, S1, S2, c, Q1, Q2, p_c)


def y_glued_realize(S: MeasureSystem) -> Tuple[Fraction, MapDistribution]:
    """theta and a law on monotone maps realizing theta*P + (1 - theta)*I."""
    if S.index != S.support:
        raise NotYGluedBipartite("the index must be the whole support")
    ext = extend_bipartite(S)
    law = realize_acyclic(ext.system).restrict(S.index.elements)
    law = MapDistribution.build(S.index, S.support, dict(law.weights))
    return ext.theta, law


# -- modified transforms on one branch ---------------------------------------------------


@dataclass(frozen=True)
class ModifiedTransform:
    """A base transform with some intervals given new values."""

    base: InverseTransform
    replacements: Tuple[Piece, ...] = ()
    gamma: Fraction = ZERO
    F_children: Dict[str, Fraction] = field(default_factory=dict)
    F_main: Optional[Fraction] = None

    @property
    def transform(self) -> InverseTransform:
        X = self.base
        for lo, hi, v in self.replacements:
            X = X.replace([(lo, hi)], v)
        return X

    def replaced(self, value: Optional[str] = None) -> List[Tuple[Fraction, Fraction]]:
        return _merge([(lo, hi) for lo, hi, v in self.replacements if value is None or v == value])


@dataclass(frozen=True)
class BranchRealization:
    Y: Poset
    corner: str
    sink: str
    root: str
    Q: MeasureSystem
    rit: WRealization
    family: Dict[str, ModifiedTransform]
    rule: str
    proportional_failure: Optional[str] = None

    def transforms(self) -> Dict[str, InverseTransform]:
        return {a: m.transform for a, m in self.family.items()}


def _branch_geometry(R: WRealization, corner: str):
    node = R.K[1]
    if node.tail != corner:  # pragma: no cover - the corner is always a path break
        raise RuntimeError("corner is not the tail of the root path")
    kids = []
    for s in node.children:
        kids.append((R.K[s].head, R.mu.floor(1, s), R.mu(s)))
    return R.mu.minus(1), kids


def _intervals(mu_minus, main_end, kids, Ft: Dict[str, Fraction]) -> List[Tuple[Fraction, Fraction]]:
    ivs = [(mu_minus, main_end)]
    for head, floor, m in kids:
        ivs.append((floor + Ft[head], floor + m))
    return _merge(ivs)


def _contains(outer, inner) -> bool:
    return all(any(a <= lo and hi <= b for a, b in outer) for lo, hi in inner)


def _proportional_rule(R, corner, m, first, second):
    """The gamma / F-tilde choice written out in the construction; None plus a reason if it breaks."""
    mu_minus, kids = _branch_geometry(R, corner)
    F1 = R.F[first]
    Fc = R.F[second] if second is not None else F1
    m1 = m[first]
    if second is None:
        g1 = max(m1 - F1(corner) + mu_minus, ZERO)
    elif m1 <= Fc(corner) - Fc.minus(corner):
        g1 = max(m1 - Fc(corner) + mu_minus, ZERO)
    else:
        g1 = mu_minus - F1.minus(corner)
    gam = {first: g1}
    denom = mu_minus - F1.minus(corner)
    Ft = {first: {}}
    for head, _, mk in kids:
        Ft[first][head] = mk - g1 * (mk - F1(head)) / denom if denom else mk
    if second is not None:
        g2 = max(m[second] - Fc(corner) + mu_minus, ZERO)
        gam[second] = g2
        Ft[second] = {}
        for head, _, mk in kids:
            base = Ft[first][head]
            # with gamma_1 = 0 the second replacement must be empty as well
            Ft[second][head] = base + (g1 - g2) * (mk - base) / g1 if g1 else mk
        if g2 > g1:
            return None, f"gamma for {second!r} exceeds gamma for {first!r}"
    out = {}
    for a, g in gam.items():
        Fa = R.F[a]
        main_end = mu_minus + m[a] - g
        if main_end < mu_minus:
            return None, f"negative main interval for {a!r}"
        if main_end > Fa(corner):
            return None, f"main interval for {a!r} leaves the corner preimage"
        for head, _, mk in kids:
            if not Fa(head) <= Ft[a][head] <= mk:
                return None, f"child interval at {head!r} for {a!r} leaves the corner preimage"
        ivs = _intervals(mu_minus, main_end, kids, Ft[a])
        if sum((hi - lo for lo, hi in ivs), ZERO) != m[a]:
            return None, f"replaced length for {a!r} is not its mass"
        out[a] = (g, main_end, Ft[a], ivs)
    if second is not None and not _contains(out[first][3], out[second][3]):
        return None, "replacement intervals are not nested"
    return out, None


def _nested_rule(R, corner, chain_: Sequence[str], m):
    """Same interval shape, but children are filled greedily so nesting always holds.

    ``chain_`` runs from the index with the most sink mass to the least.
    """
    mu_minus, kids = _branch_geometry(R, corner)
    out = {}
    prev_alloc = None
    prev_gamma = None
    for a in reversed(chain_):
        Fa = R.F[a]
        caps = {head: mk - Fa(head) for head, _, mk in kids}
        g = max(m[a] - Fa(corner) + mu_minus, ZERO)
        alloc = {head: ZERO for head, _, _ in kids}
        if prev_alloc is not None:
            g = max(g, prev_gamma)
            alloc = dict(prev_alloc)
        need = g - sum(alloc.values(), ZERO)
        for head, _, _ in kids:
            take = min(need, caps[head] - alloc[head])
            alloc[head] += take
            need -= take
        if need:  # pragma: no cover - excluded by the caps argument
            raise RuntimeError("not enough corner mass in the children")
        Ft = {head: mk - alloc[head] for head, _, mk in kids}
        main_end = mu_minus + m[a] - g
        out[a] = (g, main_end, Ft, _intervals(mu_minus, main_end, kids, Ft))
        prev_alloc, prev_gamma = alloc, g
    return out


def modified_rit_y(
    Qt: MeasureSystem,
    corner: str,
    low: Optional[str] = None,
    top: Optional[str] = None,
    first: Optional[str] = None,
    second: Optional[str] = None,
    rule: str = "auto",
) -> BranchRealization:
    """Realize a system on ``W_corner + {low, top}`` by modified recursive inverse transforms.

    Mass at the extreme vertex (``low`` if it is the minimum, else ``top``) is
    first moved onto the corner, the reduced system is realized on the tree
    rooted at the opposite vertex, and then intervals mapped to the corner
    are handed back to the extreme vertex.  ``rule`` is ``"proportional"``,
    ``"nested"`` or ``"auto"`` (proportional, falling back to nested).
    """
    Y, A = Qt.support, Qt.index
    low = A.minimal()[0] if low is None else low
    top = A.maximal()[0] if top is None else top
    tail = set(Y.neighbours(corner)) - {low, top}
    if not (Y.lt(low, corner) and Y.lt(corner, top)):
        raise HypothesisViolated("the corner must lie strictly between the two ends")
    if all(Y.lt(corner, y) for y in tail):
        sink, root = low, top
    elif all(Y.lt(y, corner) for y in tail):
        sink, root = top, low
    else:
        raise HypothesisViolated("the corner is not extremal in its tail")
    if not system_is_stoch_monotone(Qt):
        raise NotStochasticallyMonotone("branch system is not stochastically monotone")
    W_hat = induced(Y, [y for y in Y.elements if y != sink])
    m = {a: Qt[a](sink) for a in A.elements}
    fam = {}
    for a in A.elements:
        vals = {y: Qt[a](y) for y in W_hat.elements}
        vals[corner] += m[a]
        fam[a] = measure(W_hat, vals)
    Q = system(A, W_hat, fam)
    if not system_is_stoch_monotone(Q):
        raise HypothesisViolated("reduced system is not stochastically monotone")
    R = w_class_realize(Q, root=root, breaks=[corner])

    modified = [a for a in A.elements if m[a]]
    pos = {a: i for i, a in enumerate(A.linear_extension())}
    up = sink == low
    chain_ = sorted(modified, key=lambda a: (-m[a], pos[a] if up else -pos[a]))
    for x, y in zip(chain_, chain_[1:]):
        if not (A.leq(x, y) if up else A.leq(y, x)):
            raise HypothesisViolated("indices carrying sink mass do not form a chain")

    if first is None and chain_:
        first = chain_[0]
    chosen, used, why = None, rule, None
    if rule in ("proportional", "auto") and first is not None:
        extra = set(modified) - {first, second}
        if extra:
            why = f"sink mass at {sorted(extra)} outside the two modified indices"
        else:
            chosen, why = _proportional_rule(R, corner, m, first, second)
        if chosen is None and rule == "proportional":
            raise HypothesisViolated(f"proportional rule fails: {why}")
        used = "proportional"
    if chosen is None:
        chosen = _nested_rule(R, corner, chain_, m) if chain_ else {}
        used = "nested" if chain_ else "none"

    family = {}
    for a in A.elements:
        if a in chosen and m[a]:
            g, main_end, Ft, ivs = chosen[a]
            family[a] = ModifiedTransform(R.X[a], tuple((lo, hi, sink) for lo, hi in ivs), g, Ft, main_end)
        else:
            family[a] = ModifiedTransform(R.X[a])
    out = BranchRealization(Y, corner, sink, root, Q, R, family, used, why)
    X = out.transforms()
    for a in A.elements:
        if not _marginals_match(X[a], Qt[a]):  # pragma: no cover - construction invariant
            raise RuntimeError(f"branch transform for {a!r} misses its marginal")
    if not pointwise_ordered(X, A, Y):  # pragma: no cover - construction invariant
        raise RuntimeError("branch transforms are not monotone")
    return out


# -- W-glued diamonds ---------------------------------------------------------------------


@dataclass(frozen=True)
class DiamondRoles:
    a: str
    b: str
    c: str
    d: str
    W: Dict[str, FrozenSet[str]]

    def names(self) -> Tuple[str, str, str, str]:
        return self.a, self.b, self.c, self.d


def diamond_roles(S: Poset) -> DiamondRoles:
    ev = w_glued_evidence(S)
    if not ev.holds:
        raise NotWGluedDiamond(ev.failed or "not a W-glued diamond")
    dia = ev.diamond
    roles = DiamondRoles(dia["a"], dia["b"], dia["c"], dia["d"], dict(ev.components))
    for r in "abcd":
        v = getattr(roles, r)
        W = induced(S, roles.W[r])
        ok = {"a": v in W.minimal(), "d": v in W.maximal()}.get(r, v in W.minimal() or v in W.maximal())
        if not ok:
            raise NotWGluedDiamond(f"corner {v!r} is not extremal in its component")
    return roles


@dataclass(frozen=True)
class DiamondDecomposition:
    roles: DiamondRoles
    Qt1: MeasureSystem
    Qt2: MeasureSystem
    p: Fraction
    q1: Fraction
    q2: Fraction
    theta: Fraction
    theta_star: Fraction
    branch_b: BranchRealization
    branch_c: BranchRealization
    transforms: Dict[str, InverseTransform]
    family: Dict[str, ModifiedTransform]
    segments: Tuple[Tuple[str, Fraction, Fraction], ...]
    combined_F: Optional[Dict[str, DistributionFunction]] = None
    P1: Optional[MeasureSystem] = None
    P2: Optional[MeasureSystem] = None
    p1: Optional[Fraction] = None
    p2: Optional[Fraction] = None

    @property
    def q(self) -> Fraction:
        return self.q1 + self.q2

    def identity_holds(self, P: MeasureSystem) -> bool:
        """Q~ + theta*I equals P + theta_star*I on the support of P."""
        S = P.support
        for a in P.index.elements:
            lhs = self.Qt1[a].push(S) + self.Qt2[a].push(S) + unit(S, a).scale(self.theta)
            rhs = P[a] + unit(S, a).scale(self.theta_star)
            if lhs != rhs:
                return False
        return True


def _branch_table(P: MeasureSystem, roles: DiamondRoles, side: str) -> Tuple[MeasureSystem, Fraction]:
    """The system on W_side + {a, d} with common mass P_other(Y)."""
    a, d = roles.a, roles.d
    v = getattr(roles, side)
    other = roles.c if side == "b" else roles.b
    Wv = sorted(roles.W[side])
    Y = induced(P.support, Wv + [a, d])
    q = P[other].of(Y.elements)
    fam = {}
    vals = {y: P[a](y) for y in Wv}
    vals[a] = q - P[a].of(Wv)
    fam[a] = _nonneg_measure(Y, vals, f"branch {side} at {a!r}")
    rest = [y for y in Wv if y != v]
    vals = {y: P[v](y) for y in rest}
    vals[v] = q - P[v].of(rest)
    fam[v] = _nonneg_measure(Y, vals, f"branch {side} at {v!r}")
    fam[other] = measure(Y, {y: P[other](y) for y in Y.elements})
    vals = {y: P[d](y) for y in Wv}
    vals[d] = q - P[d].of(Wv)
    fam[d] = _nonneg_measure(Y, vals, f"branch {side} at {d!r}")
    index = induced(P.support, roles.names())
    return system(index, Y, fam), q


def _const(length: Fraction, value: str) -> InverseTransform:
    return InverseTransform.from_pieces(length, [(ZERO, length, value)])


def w_glued_split(P: MeasureSystem, rule: str = "auto", roles: Optional[DiamondRoles] = None) -> DiamondDecomposition:
    """Split a system on the diamond with tails at b and c only, and realize P + theta_star*I."""
    S = P.support
    roles = diamond_roles(S) if roles is None else roles
    a, b, c, d = roles.names()
    if len(roles.W["a"]) != 1 or len(roles.W["d"]) != 1:
        raise HypothesisViolated("the support may only carry tails at b and c")
    if not system_is_stoch_monotone(P):
        raise NotStochasticallyMonotone("system is not stochastically monotone")
    if P[a](d) or P[d](a):
        raise HypothesisViolated("needs P_a(d) = P_d(a) = 0")
    p = P.total
    Qt1, q1 = _branch_table(P, roles, "b")
    Qt2, q2 = _branch_table(P, roles, "c")
    q = q1 + q2
    theta = max(p - q, ZERO)
    theta_star = max(q - p, ZERO)
    br_b = modified_rit_y(Qt1, b, a, d, first=None, second=c, rule=rule)
    br_c = modified_rit_y(Qt2, c, a, d, first=None, second=b, rule=rule)
    fam = {}
    for x in roles.names():
        fb, fc = br_b.family[x], br_c.family[x]
        base = concat([fb.base, fc.base, _const(theta, d)])
        reps = list(fb.replacements) + [(lo + q1, hi + q1, v) for lo, hi, v in fc.replacements]
        if theta:
            reps.append((q, q + theta, x))
        fam[x] = ModifiedTransform(base, tuple(reps), fb.gamma + fc.gamma)
    X = {x: f.transform for x, f in fam.items()}
    segments = (("eta_b", ZERO, q1), ("eta_c", q1, q), ("theta", q, q + theta))
    out = DiamondDecomposition(
        roles, Qt1, Qt2, p, q1, q2, theta, theta_star, br_b, br_c, X, fam, segments,
        _combined_F(roles, br_b, br_c, q + theta, S),
    )
    _verify(P, X, theta_star, S)
    if not out.identity_holds(P):  # pragma: no cover - algebraic identity
        raise RuntimeError("split identity fails")
    return out


def _combined_F(roles, br_b, br_c, top, S) -> Optional[Dict[str, DistributionFunction]]:
    """Branch distribution functions glued at d; defined when both branches are rooted at d."""
    if br_b.root != roles.d or br_c.root != roles.d:
        return None
    W = induced(S, [y for y in S.elements if y != roles.a])
    T = RootedTree(W, roles.d)
    out = {}
    for x in roles.names():
        vals = {roles.d: top}
        for br, side in ((br_b, "b"), (br_c, "c")):
            for y in roles.W[side]:
                vals[y] = br.rit.F[x](y)
        out[x] = df_from_values(T, vals)
    return out


def _verify(P: MeasureSystem, X: Dict[str, InverseTransform], theta_star: Fraction, S: Poset) -> None:
    for x in P.index.elements:
        target = P[x] + unit(S, x).scale(theta_star)
        if not _marginals_match(X[x], target):  # pragma: no cover - construction invariant
            raise RuntimeError(f"transform for {x!r} misses P + theta*I")
    if not pointwise_ordered(X, P.index, S):  # pragma: no cover - construction invariant
        raise RuntimeError("transforms are not monotone")


@dataclass(frozen=True)
class WGluedRealization:
    theta_star: Fraction
    transforms: Dict[str, InverseTransform]
    family: Dict[str, ModifiedTransform]
    split: DiamondDecomposition
    outer: Optional[WRealization]
    P_outer: Optional[MeasureSystem]
    segments: Tuple[Tuple[str, Fraction, Fraction], ...]
    law: MapDistribution
    weak_theta: Fraction

    def boundary(self, name: str) -> Tuple[Fraction, Fraction]:
        for n, lo, hi in self.segments:
            if n == name:
                return lo, hi
        raise KeyError(name)


def _outer_part(P: MeasureSystem, roles: DiamondRoles) -> Tuple[MeasureSystem, Fraction]:
    S = P.support
    a, d = roles.a, roles.d
    Wa, Wd = sorted(roles.W["a"]), sorted(roles.W["d"])
    Wp = induced(S, Wa + Wd)
    top_a = P[d].of(Wa)
    bot_d = P[a].of(Wd)
    fam = {}
    for x in P.index.elements:
        vals = {y: P[x](y) for y in Wp.elements}
        vals[a] = top_a - P[x].of([y for y in Wa if y != a])
        vals[d] = bot_d - P[x].of([y for y in Wd if y != d])
        fam[x] = _nonneg_measure(Wp, vals, f"outer part at {x!r}")
    return system(P.index, Wp, fam), top_a + bot_d


def w_glued_realize(P: MeasureSystem, rule: str = "auto") -> WGluedRealization:
    """theta_star and monotone transforms realizing P_alpha + theta_star*I_alpha on the diamond.

    With the whole support as index, the tails are realized by glued
    couplings and the returned law covers every index.
    """
    S = P.support
    roles = diamond_roles(S)
    names = roles.names()
    A = induced(S, names)
    full = P.index == S
    if not full and P.index != A:
        raise NotWGluedDiamond("index must be the diamond or the whole support")
    if not system_is_stoch_monotone(P):
        raise NotStochasticallyMonotone("system is not stochastically monotone")
    PA = MeasureSystem(A, S, tuple(P[x] for x in A.elements))
    p = PA.total
    Pp, p_out = _outer_part(PA, roles)
    St = induced(S, sorted(roles.W["b"] | roles.W["c"] | {roles.a, roles.d}))
    fam2 = {}
    for x in names:
        diff = {y: PA[x](y) - (Pp[x](y) if y in Pp.support else ZERO) for y in S.elements}
        for y, v in diff.items():
            if y not in St and v:
                raise HypothesisViolated(f"inner part keeps mass {v} at {y!r}")
        fam2[x] = _nonneg_measure(St, {y: v for y, v in diff.items() if y in St}, f"inner part at {x!r}")
    P2 = system(A, St, fam2)
    sub_roles = DiamondRoles(*names, {"a": frozenset([roles.a]), "b": roles.W["b"], "c": roles.W["c"], "d": frozenset([roles.d])})
    split = w_glued_split(P2, rule=rule, roles=sub_roles)
    outer = w_class_realize(Pp, root=roles.d, breaks=[roles.d]) if p_out else None

    q, theta = split.q, split.theta
    family = {}
    for x in names:
        sf = split.family[x]
        base_parts = [split.branch_b.family[x].base, split.branch_c.family[x].base]
        if outer is not None:
            base_parts.append(outer.X[x])
        base_parts.append(_const(theta, roles.d))
        reps = [r for r in sf.replacements if r[1] <= q]
        if theta:
            reps.append((q + p_out, q + p_out + theta, x))
        family[x] = ModifiedTransform(concat(base_parts), tuple(reps), sf.gamma)
    X = {x: f.transform for x, f in family.items()}
    _verify(PA, X, split.theta_star, S)

    segments = [("eta_b", ZERO, split.q1), ("eta_c", split.q1, q)]
    if outer is not None:
        mu = outer.mu
        k = 0
        for s in outer.K[1].children:
            head = outer.K[s].head
            name = "eta_a" if head == roles.a else f"zeta_{k + 1}"
            k += head != roles.a
            segments.append((name, q + mu.floor(1, s), q + mu.ceil(1, s)))
        segments.append(("d", q + mu.minus(1), q + p_out))
    segments.append(("theta", q + p_out, q + p_out + theta))

    law = to_map_distribution(X, A, S)
    if full:
        for r in "abcd":
            comp = roles.W[r]
            if len(comp) == 1:
                continue
            v = getattr(roles, r)
            sub = induced(S, sorted(comp))
            sys_r = MeasureSystem(sub, S, tuple(P[y] + unit(S, y).scale(split.theta_star) for y in sub.elements))
            law = glue_realizations(law, realize_acyclic(sys_r), v)
        pos = [law.index._i(y) for y in S.elements]
        law = MapDistribution.build(S, S, {tuple(k[i] for i in pos): w for k, w in law.weights})
    total = p + split.theta_star
    weak = p / total if total else Fraction(1)
    law = MapDistribution.build(law.index, S, {k: w * p / total for k, w in law.weights}) if total else law
    return WGluedRealization(split.theta_star, X, family, split, outer, Pp, tuple(segments), law, weak)


# -- ordered pairs on W-glued diamonds ------------------------------------------------------


@dataclass(frozen=True)
class StrassenPair:
    X1: InverseTransform
    X2: InverseTransform
    branch_b: Optional[BranchRealization]
    branch_c: Optional[BranchRealization]
    outer: Optional[WRealization]
    segments: Tuple[Tuple[str, Fraction, Fraction], ...]


PAIR = chain("1", "2")


def _pair_branch(P1, P2, roles, side):
    a, d = roles.a, roles.d
    S = P1.poset
    Wv = sorted(roles.W[side])
    Y = induced(S, Wv + [a, d])
    q = max(P1.of(Wv), P2.of(Wv))
    v1 = {y: P1(y) for y in Wv}
    v1[a] = q - P1.of(Wv)
    v2 = {y: P2(y) for y in Wv}
    v2[d] = q - P2.of(Wv)
    return system(PAIR, Y, {"1": measure(Y, v1), "2": measure(Y, v2)}), q


def strassen_w_glued(P1: RationalMeasure, P2: RationalMeasure, S: Optional[Poset] = None, rule: str = "auto") -> StrassenPair:
    """An ordered pair of transforms with marginals P1 and P2."""
    S = P1.poset if S is None else S
    if P1.poset != S or P2.poset != S:
        raise MeasureError("measures must live on the given poset")
    if P1.total != P2.total:
        raise MassMismatch(f"total masses differ: {P1.total} vs {P2.total}")
    roles = diamond_roles(S)
    if not stoch_leq(P1, P2):
        raise NotOrdered("P1 is not below P2")
    a, d = roles.a, roles.d
    pieces1: List[InverseTransform] = []
    pieces2: List[InverseTransform] = []
    segments = []
    off = ZERO
    branches = {}
    rest1, rest2 = P1, P2
    for side in "bc":
        sysb, q = _pair_branch(P1, P2, roles, side)
        br = modified_rit_y(sysb, getattr(roles, side), a, d, rule=rule) if q else None
        branches[side] = br
        if br is not None:
            X = br.transforms()
            pieces1.append(X["1"])
            pieces2.append(X["2"])
            rest1 = rest1.minus(sysb["1"].push(S))
            rest2 = rest2.minus(sysb["2"].push(S))
        segments.append((f"eta_{side}", off, off + q))
        off += q
    Wp = induced(S, sorted(roles.W["a"] | roles.W["d"]))
    for y in S.elements:
        if y not in Wp and (rest1(y) or rest2(y)):  # pragma: no cover - branch tables use all tail mass
            raise RuntimeError(f"outer part keeps mass at {y!r}")
    outer = None
    if rest1.total:
        sys_o = system(PAIR, Wp, {"1": rest1.restrict(Wp), "2": rest2.restrict(Wp)})
        outer = w_class_realize(sys_o, root=d, breaks=[d])
        pieces1.append(outer.X["1"])
        pieces2.append(outer.X["2"])
        segments.append(("outer", off, off + rest1.total))
    X1 = concat(pieces1) if pieces1 else InverseTransform(ZERO, ())
    X2 = concat(pieces2) if pieces2 else InverseTransform(ZERO, ())
    if not (_marginals_match(X1, P1) and _marginals_match(X2, P2)):  # pragma: no cover
        raise RuntimeError("coupling misses a marginal")
    if not pointwise_ordered({"1": X1, "2": X2}, PAIR, S):  # pragma: no cover
        raise RuntimeError("coupling is not ordered")
    return StrassenPair(X1, X2, branches["b"], branches["c"], outer, tuple(segments))

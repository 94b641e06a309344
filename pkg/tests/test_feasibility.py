import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, strategies as st

import oracles
from conftest import rel_of
from monoeq.census import connected_posets_upto
from monoeq.classify import DIAMOND, is_acyclic
from monoeq.feasibility import (
    MapDistribution,
    MarginalMismatch,
    NotStochasticallyMonotone,
    glue_realizations,
    is_realizably_monotone,
    max_theta,
    max_theta_witness,
    realize_acyclic,
    strassen_lp,
)
from monoeq.fixtures import fixture_second_cycle
from monoeq.measures import (
    MassMismatch,
    NotAcyclic,
    indicator,
    measure,
    mix_identity,
    stoch_leq,
    system,
    system_is_stoch_monotone,
    unit,
    weak_combination,
)
from monoeq.poset import chain, from_cover_edges, induced
from monoeq.sampling import (
    random_measure,
    random_ordered_pair,
    random_sm_kernel,
    random_sm_system,
    random_w_glued_diamond,
)

POSETS = connected_posets_upto(6)
SMALL = [P for P in connected_posets_upto(5) if len(P) > 1]
C2 = chain("a", "b")
C3 = chain("a", "b", "c")


def _dicts(S):
    return {a: S[a].as_dict() for a in S.index.elements}


def _unit_system(A, S):
    return system(A, S, {a: unit(S, a) for a in A.elements})


def _random_sub(P, r):
    """A random connected induced subposet of P."""
    while True:
        k = r.randint(1, len(P))
        A = induced(P, r.sample(P.elements, k))
        if A.is_connected():
            return A


# -- strassen ----------------------------------------------------------------------


def test_strassen_chain_units():
    c = strassen_lp(unit(C2, "a"), unit(C2, "b"))
    assert c.weights == ((("a", "b"), Q(1)),)
    assert strassen_lp(unit(C2, "b"), unit(C2, "a")) is None


def test_strassen_equal_measures_diagonal(rng):
    for P in POSETS[:40]:
        p = random_measure(P, rng)
        c = strassen_lp(p, p)
        assert c is not None and c.first() == p and c.second() == p and c.is_ordered()


def test_strassen_mass_mismatch():
    with pytest.raises(MassMismatch):
        strassen_lp(unit(C2, "a"), measure(C2, {"b": 2}))


@given(st.integers(0, 10 ** 6))
def test_strassen_iff_stoch_leq(seed):
    r = random.Random(seed)
    P = r.choice(POSETS)
    if r.random() < 0.5:
        p, q = random_ordered_pair(P, r)
    else:
        p, q = random_measure(P, r), random_measure(P, r)
    c = strassen_lp(p, q)
    assert (c is not None) == oracles.stoch_leq(p.as_dict(), q.as_dict(), P.elements, rel_of(P))
    assert (c is not None) == stoch_leq(p, q)
    if c is not None:
        assert c.is_ordered() and c.first() == p and c.second() == q


# -- realizability -----------------------------------------------------------------------


def test_unit_system_realized_by_inclusion(rng):
    for P in POSETS[:60]:
        A = _random_sub(P, rng)
        d = is_realizably_monotone(_unit_system(A, P))
        assert d is not None
        assert d.weights == ((tuple(A.elements), Q(1)),)
        assert max_theta(_unit_system(A, P)) == 1


def test_second_diamond_not_realizable():
    fx = fixture_second_cycle("second-diamond")
    assert system_is_stoch_monotone(fx.system)
    assert is_realizably_monotone(fx.system) is None


@pytest.mark.parametrize("case", ["bowtie-e=a", "bowtie-e=b", "second-diamond"])
def test_weak_combination_fails_for_every_theta(case):
    fx = fixture_second_cycle(case)
    for t in (Q(1), Q(1, 2), Q(1, 10), Q(1, 1000)):
        assert is_realizably_monotone(weak_combination(fx.system, t)) is None


def test_realizable_implies_theta_one(rng):
    for P in SMALL[:30]:
        K = random_sm_kernel(P, rng)
        if is_realizably_monotone(K) is not None:
            assert max_theta(K) == 1


@given(st.integers(0, 10 ** 6))
def test_acyclic_kernels_realizable(seed):
    r = random.Random(seed)
    P = r.choice([P for P in SMALL if is_acyclic(P)])
    K = random_sm_kernel(P, r)
    d = is_realizably_monotone(K)
    assert d is not None and d.all_monotone() and d.realizes(K) and d.total == 1


@given(st.integers(0, 10 ** 6))
def test_realizable_implies_stoch_monotone(seed):
    r = random.Random(seed)
    P = r.choice(SMALL)
    A = _random_sub(P, r)
    fam = {a: random_measure(P, r, sparsity=0.5) for a in A.elements}
    S = system(A, P, fam)
    d = is_realizably_monotone(S)
    if d is not None:
        assert d.realizes(S) and d.all_monotone()
        assert system_is_stoch_monotone(S)


@given(st.integers(0, 10 ** 6))
def test_realizability_matches_float_oracle(seed):
    r = random.Random(seed)
    P = r.choice(SMALL)
    A = _random_sub(P, r)
    S = random_sm_system(A, P, r)
    exact = is_realizably_monotone(S) is not None
    assert exact == oracles.float_realizable(A.elements, rel_of(A), P.elements, rel_of(P), _dicts(S))


@given(st.integers(0, 10 ** 6))
def test_max_theta_attained_and_downward_closed(seed):
    r = random.Random(seed)
    P = r.choice(SMALL)
    K = random_sm_kernel(P, r)
    t, law = max_theta_witness(K)
    assert 0 <= t <= 1
    assert law.all_monotone() and law.realizes(mix_identity(K, t))
    for s in (t / 2, t / 3, Q(0)):
        assert is_realizably_monotone(mix_identity(K, s)) is not None
    if t < 1:
        assert is_realizably_monotone(weak_combination(K, (1 + t) / 2)) is None
    approx = oracles.float_max_theta(P.elements, rel_of(P), P.elements, rel_of(P), _dicts(K))
    assert abs(float(t) - approx) < 1e-7


def test_max_theta_positive_on_w_glued(rng):
    for _ in range(8):
        P = random_w_glued_diamond(5, rng)
        K = random_sm_kernel(P, rng)
        assert max_theta(K) > 0


def test_max_theta_zero_on_bowtie_fixture():
    fx = fixture_second_cycle("bowtie-e=a")
    assert max_theta(fx.system) == 0


# -- constructive acyclic realization ---------------------------------------------------------


def test_realize_acyclic_two_chain_forced():
    S = system(C2, C2, {"a": unit(C2, "a"), "b": unit(C2, "b")})
    assert realize_acyclic(S).weights == ((("a", "b"), Q(1)),)


def _check_law(law, S):
    assert law.total == 1 and law.all_monotone()
    for a in S.index.elements:
        assert law.marginal(a) == S[a]


STAR = from_cover_edges("abcd", [("a", "b"), ("a", "c"), ("a", "d")])
STAR_DOWN = from_cover_edges("abcd", [("b", "a"), ("c", "a"), ("d", "a")])


@given(st.integers(0, 10 ** 6))
def test_realize_acyclic_chain_and_stars(seed):
    r = random.Random(seed)
    P = r.choice(POSETS)
    for A in (C3, STAR, STAR_DOWN):
        S = random_sm_system(A, P, r)
        _check_law(realize_acyclic(S), S)


def test_realize_acyclic_rejects():
    K = system(DIAMOND, DIAMOND, {x: unit(DIAMOND, x) for x in "abcd"})
    with pytest.raises(NotAcyclic):
        realize_acyclic(K)
    bad = system(C2, C2, {"a": unit(C2, "b"), "b": unit(C2, "a")})
    with pytest.raises(NotStochasticallyMonotone):
        realize_acyclic(bad)


# -- gluing and restriction ---------------------------------------------------------------------


def test_glue_two_edges():
    S = chain("x", "y", "z")
    A1, A2 = induced(C3, "ab"), induced(C3, "bc")
    d1 = MapDistribution.build(A1, S, {("x", "y"): Q(1, 2), ("y", "y"): Q(1, 2)})
    d2 = MapDistribution.build(A2, S, {("y", "y"): Q(1, 2), ("y", "z"): Q(1, 2)})
    g = glue_realizations(d1, d2, "b")
    assert dict(g.weights) == {
        ("x", "y", "y"): Q(1, 4),
        ("x", "y", "z"): Q(1, 4),
        ("y", "y", "y"): Q(1, 4),
        ("y", "y", "z"): Q(1, 4),
    }
    assert g.restrict("ab") == d1 and g.restrict("bc") == d2


def test_glue_marginal_mismatch():
    S = chain("x", "y")
    d1 = MapDistribution.build(induced(C3, "ab"), S, {("x", "y"): Q(1)})
    d2 = MapDistribution.build(induced(C3, "bc"), S, {("x", "y"): Q(1)})
    with pytest.raises(MarginalMismatch):
        glue_realizations(d1, d2, "b")


def test_restriction_realizes_restricted_system(rng):
    for P in SMALL[:40]:
        K = random_sm_kernel(P, rng)
        d = is_realizably_monotone(K)
        if d is None:
            continue
        sub = P.elements[: max(1, len(P) // 2)]
        A = induced(P, sub)
        assert d.restrict(sub).realizes(system(A, P, {a: K[a] for a in sub}))


def test_indicator_half_system_on_diamond():
    S = system(DIAMOND, DIAMOND, {x: indicator(DIAMOND, "bc", Q(1, 2)) for x in "abcd"})
    assert is_realizably_monotone(S) is not None

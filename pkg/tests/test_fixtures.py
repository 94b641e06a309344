from fractions import Fraction as Q

import pytest

import oracles
from conftest import rel_of
from monoeq.classify import BOWTIE, DIAMOND, Y_POSET
from monoeq.feasibility import is_realizably_monotone, max_theta
from monoeq.fixtures import (
    BIPARTITE_CASES,
    SECOND_CYCLE_CASES,
    RuleGap,
    all_fixtures,
    extend_to_full,
    fixture_bipartite_violation,
    fixture_second_cycle,
    fixture_yposet,
)
from monoeq.measures import MeasureError, indicator, system, system_is_stoch_monotone, unit, weak_combination
from monoeq.poset import from_cover_edges, induced

THIRD, HALF = Q(1, 3), Q(1, 2)


def _row(fx, x, labels, pattern, weight):
    """The measure weight * I_U with U given in pattern names."""
    return indicator(fx.poset, [labels[u] for u in pattern], weight)


def _diamond_count(P):
    rel = rel_of(P)
    found = {frozenset(f.values()) for f in oracles.embeddings(P.elements, rel, DIAMOND.elements, rel_of(DIAMOND))}
    return len(found)


# -- quoted masses --------------------------------------------------------------------------


@pytest.mark.parametrize("case", BIPARTITE_CASES)
def test_bipartite_masses(case):
    fx = fixture_bipartite_violation(case)
    bip = fx.patterns["bipartite"]
    lab = fx.patterns["bowtie"]
    a1, a2, b1, b2 = (bip[k] for k in "efgh")
    assert fx.system[a1] == _row(fx, a1, lab, "efh", THIRD)
    assert fx.system[a2] == _row(fx, a2, lab, "efg", THIRD)
    assert fx.system[b1] == _row(fx, b1, lab, "fgh", THIRD)
    assert fx.system[b2] == _row(fx, b2, lab, "egh", THIRD)
    for x in fx.poset.elements:
        if x in (a1, a2, b1, b2):
            continue
        above = fx.poset.leq(a1, x) or fx.poset.leq(a2, x)
        assert fx.system[x] == _row(fx, x, lab, "gh" if above else "ef", HALF)


def test_second_cycle_bowtie_masses():
    fx = fixture_second_cycle("bowtie-e=a")
    lab = fx.patterns["bowtie"]
    assert lab["e"] == "a"
    for x, us in {"a": "ef", "b": "fh", "c": "fg", "d": "gh"}.items():
        assert fx.system[x] == _row(fx, x, lab, us, HALF)
    fx = fixture_second_cycle("bowtie-e=b")
    lab = fx.patterns["bowtie"]
    assert lab["e"] == "b"
    for x, us in {"a": "ef", "b": "eg", "c": "fg", "d": "gh"}.items():
        assert fx.system[x] == _row(fx, x, lab, us, HALF)


def test_second_diamond_masses():
    fx = fixture_second_cycle("second-diamond")
    lab = fx.patterns["second diamond"]
    for x, us in {"a": "ab", "b": "bc", "c": "ad", "d": "bd"}.items():
        assert fx.system[x] == _row(fx, x, lab, us, HALF)


def test_yposet_masses():
    fx = fixture_yposet()
    lab = fx.patterns["Y"]
    for x, us in {"a": "ef", "b": "eg", "c": "eh", "d": "gh"}.items():
        assert fx.system[x] == _row(fx, x, lab, us, HALF)


# -- host patterns --------------------------------------------------------------------------


@pytest.mark.parametrize("fx", all_fixtures(), ids=lambda f: f.name)
def test_patterns_are_embeddings(fx):
    rel = rel_of(fx.poset)
    shapes = {"bipartite": BOWTIE, "bowtie": BOWTIE, "diamond": DIAMOND, "second diamond": DIAMOND, "Y": Y_POSET}
    for name, labels in fx.patterns.items():
        pat = shapes[name]
        emb = oracles.embeddings(fx.poset.elements, rel, pat.elements, rel_of(pat))
        assert labels in emb


def test_yposet_host_has_unique_diamond():
    fx = fixture_yposet()
    assert _diamond_count(fx.poset) == 1
    lab = fx.patterns["Y"]
    assert len(set(lab.values()) & set("abcd")) <= 1


def test_second_diamond_host_has_another_diamond():
    assert _diamond_count(fixture_second_cycle("second-diamond").poset) >= 2


def test_bipartite_hosts_differ_in_h():
    assert fixture_bipartite_violation("h=b2").patterns["bowtie"]["h"] == "b2"
    h = fixture_bipartite_violation("h-in-S1").patterns["bowtie"]["h"]
    assert h not in ("a1", "a2", "b1", "b2")


# -- expectations ------------------------------------------------------------------------------


@pytest.mark.parametrize("fx", all_fixtures(), ids=lambda f: f.name)
def test_fixture_expectations(fx):
    got = fx.check()
    assert got == {"stoch_monotone": True, "max_theta": 0}
    assert fx.passes()


@pytest.mark.parametrize("fx", all_fixtures(), ids=lambda f: f.name)
def test_full_extension_monotone(fx):
    assert fx.full is not None
    assert system_is_stoch_monotone(fx.full)


def test_core_bounds_the_full_system():
    fx = fixture_bipartite_violation("h=b2")
    assert max_theta(fx.system) == 0


def test_second_diamond_contradiction_target():
    fx = fixture_second_cycle("second-diamond")
    b1 = fx.patterns["second diamond"]["b"]
    for t in (Q(1), Q(1, 2), Q(1, 7)):
        assert weak_combination(fx.system, t)["b"](b1) == t / 2
    assert is_realizably_monotone(fx.system) is None


# -- extension rule -----------------------------------------------------------------------------


def _plain(host):
    A = induced(host, "abcd")
    return system(A, host, {x: unit(host, x) for x in "abcd"})


def test_extend_on_diamond_itself():
    P = _plain(DIAMOND)
    assert list(extend_to_full(P).items()) == list(P.items())


def test_extend_above_b_gets_P_d():
    host = from_cover_edges("abcdg", [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d"), ("b", "g")])
    full = extend_to_full(_plain(host))
    assert full["g"] == unit(host, "d")


def test_extend_incomparable_gets_P_a():
    host = from_cover_edges("abcdf", [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d"), ("f", "d")])
    full = extend_to_full(_plain(host))
    assert full["f"] == unit(host, "a")


def test_extend_rule_gap():
    host = from_cover_edges("abcdx", [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d"), ("x", "b")])
    with pytest.raises(RuleGap):
        extend_to_full(_plain(host))


def test_extend_needs_diamond_index():
    with pytest.raises(MeasureError):
        extend_to_full(system(BOWTIE, BOWTIE, {x: unit(BOWTIE, x) for x in "efgh"}))


def test_unknown_case():
    with pytest.raises(ValueError):
        fixture_second_cycle("nope")
    with pytest.raises(ValueError):
        fixture_bipartite_violation("nope")
    assert len(all_fixtures()) == len(BIPARTITE_CASES) + len(SECOND_CYCLE_CASES) + 1

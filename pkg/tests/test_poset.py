import itertools
import random

import pytest
from hypothesis import given, strategies as st

import oracles
from conftest import rel_of
from monoeq.census import connected_posets_upto
from monoeq.classify import BOWTIE, DIAMOND, S1, W_POSET, Y_POSET
from monoeq.poset import (
    BadIntersection,
    DirectedCycle,
    MonotoneMap,
    RedundantCover,
    SizeLimit,
    UnknownElement,
    chain,
    dual,
    find_induced,
    from_cover_edges,
    glue,
    identity_map,
    induced,
    is_isomorphic,
    monotone_maps,
    monotone_value_tuples,
    up_sets,
)

SMALL = connected_posets_upto(5)
SIX = [P for P in connected_posets_upto(6) if len(P) == 6]


def test_diamond_from_covers():
    P = from_cover_edges("abcd", [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])
    assert P == DIAMOND
    assert P.leq("a", "d") and not P.comparable("b", "c")


def test_singleton():
    P = from_cover_edges(["x"], [])
    assert P.elements == ("x",) and P.covers == frozenset()


def test_two_cycle_rejected():
    with pytest.raises(DirectedCycle):
        from_cover_edges("ab", [("a", "b"), ("b", "a")])


def test_redundant_cover_rejected():
    with pytest.raises(RedundantCover):
        from_cover_edges("abc", [("a", "b"), ("b", "c"), ("a", "c")])


def test_unknown_element_rejected():
    with pytest.raises(UnknownElement):
        from_cover_edges("ab", [("a", "z")])


@pytest.mark.parametrize("P", SMALL + SIX[:80], ids=str)
def test_order_is_closure_and_covers_are_reduction(P):
    rel = rel_of(P)
    assert {(x, y) for x in P.elements for y in P.elements if P.leq(x, y)} == rel
    assert oracles.reduction(P.elements, rel) == set(P.covers)
    # partial order axioms on triples
    for x, y, z in itertools.product(P.elements, repeat=3):
        if P.leq(x, y) and P.leq(y, z):
            assert P.leq(x, z)
        if P.leq(x, y) and P.leq(y, x):
            assert x == y


def test_up_sets_chain():
    assert sorted(map(sorted, up_sets(chain("a", "b")))) == [[], ["a", "b"], ["b"]]


def test_up_sets_diamond_and_bowtie_counts():
    assert len(up_sets(DIAMOND)) == 6
    assert len(up_sets(DIAMOND)) == len(oracles.all_up_sets(DIAMOND.elements, rel_of(DIAMOND)))
    assert len(up_sets(BOWTIE)) == len(oracles.all_up_sets(BOWTIE.elements, rel_of(BOWTIE)))


@pytest.mark.parametrize("P", SMALL, ids=str)
def test_up_sets_match_brute_force_and_form_a_lattice(P):
    got = up_sets(P)
    assert len(got) == len(set(got))
    assert set(got) == set(oracles.all_up_sets(P.elements, rel_of(P)))
    fam = set(got)
    for U, V in itertools.combinations(got, 2):
        assert U | V in fam and U & V in fam
    # complements are the up-sets of the dual
    dual_ups = set(up_sets(dual(P)))
    assert {frozenset(P.elements) - U for U in got} == dual_ups


def test_up_sets_order_is_deterministic():
    assert up_sets(BOWTIE) == up_sets(from_cover_edges("hgfe", list(BOWTIE.covers)))


def test_induced_recomputes_covers():
    assert induced(DIAMOND, "abd") == chain("a", "b", "d")
    sub = induced(W_POSET, "efg")
    assert sub.covers == {("e", "f"), ("e", "g")}


def test_induced_unknown():
    with pytest.raises(UnknownElement):
        induced(DIAMOND, "az")


def test_dual():
    assert dual(chain("a", "b")) == chain("b", "a")
    assert is_isomorphic(dual(BOWTIE), BOWTIE)
    assert not is_isomorphic(dual(Y_POSET), Y_POSET)


@pytest.mark.parametrize("P", SMALL, ids=str)
def test_dual_is_involution(P):
    assert dual(dual(P)) == P


def test_glue():
    assert glue(chain("a", "c"), chain("c", "b"), "c") == chain("a", "c", "b")
    with pytest.raises(BadIntersection):
        glue(chain("a", "c"), chain("a", "c"), "c")


def test_find_induced_examples():
    assert len(find_induced(DIAMOND, DIAMOND)) == 2
    assert find_induced(chain("a", "b", "c", "d"), BOWTIE) == []
    assert find_induced(S1, Y_POSET)


@pytest.mark.parametrize("P", SMALL + SIX[::6], ids=str)
@pytest.mark.parametrize("pat", [DIAMOND, BOWTIE, Y_POSET, dual(Y_POSET), W_POSET], ids=["diamond", "bowtie", "Y", "dualY", "W"])
def test_find_induced_matches_injection_oracle(P, pat):
    got = find_induced(P, pat)
    want = oracles.embeddings(P.elements, rel_of(P), pat.elements, rel_of(pat))
    assert sorted(map(sorted, (e.items() for e in got))) == sorted(map(sorted, (e.items() for e in want)))


def test_monotone_map_counts():
    c2 = chain("a", "b")
    assert len(monotone_maps(c2, c2)) == 3
    one = from_cover_edges(["x"], [])
    assert len(monotone_maps(one, DIAMOND)) == 4
    maps = monotone_maps(DIAMOND, DIAMOND)
    assert identity_map(DIAMOND) in maps
    want = oracles.monotone_functions(list(DIAMOND.elements), rel_of(DIAMOND), list(DIAMOND.elements), rel_of(DIAMOND))
    assert sorted(m.values for m in maps) == sorted(want)


@pytest.mark.parametrize("P", SMALL[::3], ids=str)
def test_monotone_tuples_match_product_oracle(P):
    want = oracles.monotone_functions(list(P.elements), rel_of(P), list(P.elements), rel_of(P))
    assert sorted(monotone_value_tuples(P, P)) == sorted(want)


def test_size_limit():
    with pytest.raises(SizeLimit):
        monotone_value_tuples(DIAMOND, DIAMOND, bound=5)


@given(st.integers(0, 10 ** 6))
def test_composition_of_monotone_maps_is_monotone(seed):
    r = random.Random(seed)
    P = r.choice(SMALL)
    maps = monotone_maps(P, P)
    f, g = r.choice(maps), r.choice(maps)
    h = f.compose(g)
    assert isinstance(h, MonotoneMap) and h.is_monotone()

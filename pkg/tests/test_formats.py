import random
from fractions import Fraction as Q
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from monoeq.census import connected_posets_upto
from monoeq.formats import (
    ParseError,
    dump_generator,
    dump_measure,
    dump_poset,
    dump_system,
    fmt,
    load_generator,
    load_measure,
    load_poset,
    load_system,
    parse_rational,
)
from monoeq.poset import chain
from monoeq.sampling import random_generator, random_measure, random_sm_kernel

SAMPLES = Path(__file__).resolve().parent.parent / "samples"
POSETS = connected_posets_upto(5)


def test_fmt():
    assert fmt(Q(6, 4)) == "3/2"
    assert fmt(Q(-1, 3)) == "-1/3"
    assert fmt(4) == "4"
    assert fmt(Q(0)) == "0"


def test_parse_rational():
    assert parse_rational("3/6") == Q(1, 2)
    assert parse_rational("-2") == -2
    for bad in ("0.5", "1e3", "1/0", "a/b", "1//2"):
        with pytest.raises(ParseError):
            parse_rational(bad)


def test_poset_file():
    text = "# a chain\nelements: a b c\na < b  # cover\nb < c\n"
    P = load_poset(text)
    assert P == chain("a", "b", "c")
    assert dump_poset(P) == "elements: a b c\na < b\nb < c\n"


def test_poset_without_header_infers_elements():
    assert load_poset("x < y\n") == chain("x", "y")


@pytest.mark.parametrize(
    "text, line",
    [
        ("elements: a b\na < c\n", 2),
        ("elements: a b\na < b\nb < a\n", None),
        ("elements: a a\n", 1),
        ("elements: a b\na: a=1\n", 2),
        ("elements: a\nelements: b\n", 2),
        ("a < b\nelements: a b\n", 2),
        ("elements: a b\n???\n", 2),
    ],
)
def test_poset_errors(text, line):
    with pytest.raises(ParseError) as e:
        load_poset(text)
    if line is not None:
        assert e.value.line == line and str(e.value).startswith(f"line {line}:")


def test_measure_and_system_files():
    S = chain("a", "b", "c")
    m = load_measure("a=1/2 b=1/4 c=1/4\n", S)
    assert m.as_dict() == {"a": Q(1, 2), "b": Q(1, 4), "c": Q(1, 4)}
    assert dump_measure(m) == "a=1/2 b=1/4 c=1/4\n"
    P = load_system("a: b=1\nc: c=1/2 b=1/2\n", S)
    assert P.index.elements == ("a", "c")
    assert dump_system(P) == "a: b=1\nc: b=1/2 c=1/2\n"


@pytest.mark.parametrize(
    "text, line",
    [
        ("a: b=x\n", 1),
        ("a: q=1\n", 1),
        ("a: b=1\na: b=1\n", 2),
        ("z: b=1\n", 1),
        ("b=1\n", 1),
        ("a: b=1 b=2\n", 1),
        ("a: b=-1\n", 1),
    ],
)
def test_system_errors(text, line):
    with pytest.raises(ParseError) as e:
        load_system(text, chain("a", "b"))
    assert e.value.line == line


def test_generator_file():
    L = load_generator((SAMPLES / "chain_up.gen").read_text())
    assert L("x", "z") == 1 and L("y", "z") == 2 and L("x", "x") == -2
    assert load_generator(dump_generator(L)) == L


@pytest.mark.parametrize(
    "text, line",
    [
        ("elements: x y\nx: y=1\n", None),
        ("states: x y\nx: x=1\n", 2),
        ("states: x y\nx: y=-1\n", 2),
        ("states: x y\nq: y=1\n", 2),
        ("states: x y\nx: w=1\n", 2),
    ],
)
def test_generator_errors(text, line):
    with pytest.raises(ParseError) as e:
        load_generator(text)
    if line is not None:
        assert e.value.line == line


@given(st.integers(0, 10 ** 6))
def test_round_trips(seed):
    r = random.Random(seed)
    P = r.choice(POSETS)
    assert load_poset(dump_poset(P)) == P
    m = random_measure(P, r)
    assert load_measure(dump_measure(m), P) == m
    K = random_sm_kernel(P, r)
    text = dump_system(K)
    assert dump_system(load_system(text, P)) == text
    if len(P) > 1:
        L = random_generator(P, r)
        g = dump_generator(L)
        assert dump_generator(load_generator(g)) == g


@pytest.mark.parametrize("name", sorted(p.name for p in SAMPLES.iterdir()))
def test_samples_parse(name):
    text = (SAMPLES / name).read_text()
    if name.endswith(".poset"):
        P = load_poset(text)
        assert load_poset(dump_poset(P)) == P
    elif name.endswith(".gen"):
        load_generator(text)
    elif name.endswith(".system"):
        host = {"diamond_tail.system": "diamond_tail.poset", "wposet_chain.system": "wposet.poset"}[name]
        load_system(text, load_poset((SAMPLES / host).read_text()))
    elif name.endswith(".measure"):
        load_measure(text, load_poset((SAMPLES / "diamond.poset").read_text()))

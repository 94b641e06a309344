"""Acceptance criteria 1-9, exact.

Each test records one PASS/FAIL line, printed in the terminal summary and
also straight to the terminal as it finishes.  The 6-element kernel sweep of
criterion 1 is sampled unless MONOEQ_ACCEPT_SIX=1.
"""

import os
import random
import subprocess
import sys
from pathlib import Path

import pytest

import oracles
from conftest import rel_of
from monoeq.census import connected_posets, connected_posets_upto
from monoeq.classify import DIAMOND, FAILS, KINDS, brute_force_extension, has_acyclic_extension, verdict
from monoeq.feasibility import max_theta, strassen_lp
from monoeq.fixtures import all_fixtures
from monoeq.glued import strassen_w_glued, w_glued_realize
from monoeq.lp import LinearProgram
from monoeq.markov import decompose_generator, default_rate, generator, kernel_from_decomposition, massey_check, uniformize
from monoeq.measures import mix_identity, system_is_stoch_monotone, unit, witness_up_set
from monoeq.poset import chain, from_cover_edges, induced
from monoeq.rit import build_rit, closed_form_tail_preimage, w_class_realize
from monoeq.sampling import (
    random_generator,
    random_measure,
    random_ordered_pair,
    random_sm_kernel,
    random_sm_system,
    random_w_class,
    random_w_glued_diamond,
)

SEED = 20240611
SAMPLES = Path(__file__).resolve().parent.parent / "samples"
RESULTS = {}


@pytest.fixture
def record(request, capsys):
    n = request.node.get_closest_marker("criterion").args[0]
    state = {"detail": ""}
    yield state
    failed = getattr(request.node, "rep_call", None)
    ok = failed is not None and failed.passed
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {state['detail']}"
    RESULTS[n] = line
    with capsys.disabled():
        print("\n" + line)


def _relabel(P, rng):
    names = list(P.elements)
    new = [f"v{k}" for k in range(len(names))]
    rng.shuffle(new)
    ren = dict(zip(names, new))
    return from_cover_edges([ren[x] for x in names], [(ren[x], ren[y]) for x, y in P.covers])


def _lengths_match(X, target):
    L = oracles.lengths(X.pieces)
    return all(L.get(x, 0) == target(x) for x in target.poset.elements) and X.length == target.total


def _ordered(X, A, S):
    rs, ra = rel_of(S), rel_of(A)
    pieces = {a: X[a].pieces for a in A.elements}
    return all(
        (oracles.value_at(pieces[a], w), oracles.value_at(pieces[b], w)) in rs
        for w in oracles.cuts(*pieces.values())
        for a, b in ra
    )


def _kernel_sweep(posets, per, rng):
    bad = []
    for P in posets:
        if verdict(P).kind == FAILS:
            continue
        for _ in range(per):
            K = random_sm_kernel(P, rng)
            if not max_theta(K) > 0:
                bad.append(P)
                break
    return bad


@pytest.mark.criterion(1)
def test_trichotomy_consistency(record):
    rng = random.Random(SEED)
    small = connected_posets_upto(5)
    six = connected_posets(6)
    for P in small + six:
        v = verdict(P)
        assert v.kind in KINDS
        assert verdict(_relabel(P, rng)).kind == v.kind
    bad = _kernel_sweep(small, 200, rng)
    assert not bad, f"kernels with max_theta 0 on {bad}"
    if os.environ.get("MONOEQ_ACCEPT_SIX") == "1":
        six_sample, per = six, 200
    else:
        six_sample, per = rng.sample(six, 30), 5
    bad = _kernel_sweep(six_sample, per, rng)
    assert not bad, f"kernels with max_theta 0 on {bad}"
    good = sum(verdict(P).kind != FAILS for P in small)
    record["detail"] = f"{len(small)} posets <=5 ({good} x 200 kernels), {len(six)} six-element verdicts"


@pytest.mark.criterion(2)
def test_fixtures_are_monotone_but_not_weakly_realizable(record):
    fxs = all_fixtures()
    for fx in fxs:
        assert system_is_stoch_monotone(fx.system)
        assert system_is_stoch_monotone(fx.full)
        assert max_theta(fx.system) == 0, fx.name
    record["detail"] = f"{len(fxs)} fixtures"


@pytest.mark.criterion(3)
def test_massey_equivalence(record):
    rng = random.Random(SEED + 3)
    posets = [P for P in connected_posets_upto(5) if len(P) > 1]
    agree = 0
    for _ in range(500):
        S = rng.choice(posets)
        L = random_generator(S, rng)
        got = massey_check(L)
        rates = {x: {y: L(x, y) for y in S.elements if y != x} for x in S.elements}
        assert got == oracles.massey(rates, S.elements, rel_of(S))
        assert got == system_is_stoch_monotone(uniformize(L, 2 * L.lam_star))
        agree += got
    record["detail"] = f"500 generators, {agree} monotone"


@pytest.mark.criterion(4)
def test_decomposition_round_trip(record):
    rng = random.Random(SEED + 4)
    posets = [P for P in connected_posets_upto(5) if len(P) > 1]
    found = 0
    for _ in range(200):
        S = rng.choice(posets)
        L = random_generator(S, rng)
        gamma = decompose_generator(L)
        assert (gamma is not None) == (max_theta(uniformize(L)) > 0)
        if gamma is None:
            continue
        found += 1
        total = sum(gamma.values())
        for lam in (total, max(total, default_rate(L))):
            K = kernel_from_decomposition(S, gamma, lam)
            for x in S.elements:
                for y in S.elements:
                    assert K[x](y) == int(x == y) + L(x, y) / lam
    for fx in all_fixtures():
        P = fx.full
        S = P.support
        L = generator(S, {x: {y: P[x](y) for y in S.elements if y != x and P[x](y)} for x in S.elements})
        assert decompose_generator(L) is None, fx.name
    record["detail"] = f"{found}/200 decomposed, {len(all_fixtures())} fixture generators infeasible"


@pytest.mark.criterion(5)
def test_w_class_transforms(record):
    rng = random.Random(SEED + 5)
    indexes = [chain("a", "d"), DIAMOND]
    for _ in range(200):
        W = random_w_class(7, rng, min_elements=2)
        A = rng.choice(indexes)
        S = random_sm_system(A, W, rng)
        R = w_class_realize(S)
        for a in A.elements:
            assert _lengths_match(R.X[a], S[a])
            assert R.X[a] == build_rit(R.mu, R.F[a], R.K)
            for k in R.K:
                tail = R.K[k].tail
                assert build_rit(R.mu, R.F[a], R.K, k).preimage([tail]) == closed_form_tail_preimage(R.mu, R.F[a], R.K, k)
        assert _ordered(R.X, A, W)
    record["detail"] = "200 systems"


def _law_is_feasible(law, P, S):
    """Check the law against the realizability constraints, columns built from the oracle order."""
    rs = rel_of(S)
    ra = rel_of(P.index)
    items = list(law.weights)
    idx = P.index.elements
    for key, _ in items:
        f = dict(zip(idx, key))
        if any((f[a], f[b]) not in rs for a, b in ra):
            return False
    lp = LinearProgram(len(items))
    for i, a in enumerate(idx):
        for x in S.elements:
            lp.add_eq({k: 1 for k, (key, _) in enumerate(items) if key[i] == x}, P[a](x))
    return lp.check([w for _, w in items])


@pytest.mark.criterion(6)
def test_w_glued_constructions(record):
    rng = random.Random(SEED + 6)
    sizes = []
    for _ in range(200):
        S = random_w_glued_diamond(9, rng)
        K = random_sm_kernel(S, rng)
        R = w_glued_realize(K)
        A = induced(S, R.split.roles.names())
        for x in A.elements:
            assert _lengths_match(R.transforms[x], K[x] + unit(S, x).scale(R.theta_star))
        assert _ordered(R.transforms, A, S)
        assert R.weak_theta > 0
        assert _law_is_feasible(R.law, mix_identity(K, R.weak_theta), S)
        sizes.append(len(S))
    record["detail"] = f"200 kernels, {min(sizes)}-{max(sizes)} elements"


@pytest.mark.criterion(7)
def test_strassen(record):
    rng = random.Random(SEED + 7)
    for _ in range(500):
        S = random_w_glued_diamond(9, rng)
        p1, p2 = random_ordered_pair(S, rng)
        pair = strassen_w_glued(p1, p2)
        assert _lengths_match(pair.X1, p1) and _lengths_match(pair.X2, p2)
        rs = rel_of(S)
        assert all((pair.X1(w), pair.X2(w)) in rs for w in oracles.cuts(pair.X1.pieces, pair.X2.pieces))
    unordered = 0
    for _ in range(500):
        S = random_w_glued_diamond(9, rng)
        p1, p2 = random_measure(S, rng), random_measure(S, rng)
        c = strassen_lp(p1, p2)
        U = witness_up_set(p1, p2)
        assert (c is None) == (U is not None)
        assert (U is None) == oracles.stoch_leq(p1.as_dict(), p2.as_dict(), S.elements, rel_of(S))
        if U is not None:
            unordered += 1
            assert oracles.is_up_set(rel_of(S), U) and p1.of(U) > p2.of(U)
        else:
            assert c.first() == p1 and c.second() == p2 and c.is_ordered()
    record["detail"] = f"500 ordered pairs, 500 random pairs ({unordered} unordered)"


@pytest.mark.criterion(8)
def test_acyclic_extension_decision(record):
    posets = connected_posets_upto(6)
    bad = [P for P in posets if has_acyclic_extension(P) != brute_force_extension(P)]
    assert not bad
    yes = sum(has_acyclic_extension(P) for P in posets)
    record["detail"] = f"{len(posets)} posets <=6, {yes} extendable"


CLI_RUNS = [
    ["classify", "diamond.poset"],
    ["classify", "bowtie.poset", "--format", "json-like"],
    ["check-sm", "massey_fail.gen"],
    ["check-sm", "diamond_tail.poset", "diamond_tail.system"],
    ["check-rm", "chain_up.gen"],
    ["check-rm", "wposet.poset", "wposet_chain.system"],
    ["decompose", "chain_up.gen"],
    ["decompose", "massey_fail.gen"],
    ["simulate", "chain_up.gen", "--horizon", "3", "--seed", "11"],
    ["realize", "diamond_tail.poset", "diamond_tail.system"],
    ["realize", "diamond_tail.poset", "diamond_tail.system", "--rule", "proportional"],
    ["realize-w", "wposet.poset", "wposet_chain.system"],
    ["couple", "diamond.poset", "p1.measure", "p2.measure"],
    ["couple", "diamond.poset", "p2.measure", "p1.measure", "--format", "json-like"],
    ["fixtures", "list"],
    ["fixtures", "check"],
    ["sweep", "--max-elements", "4", "--kernels", "3", "--seed", "5"],
    ["classify", "no-such-file.poset"],
]


@pytest.mark.criterion(9)
def test_cli_determinism(record):
    for argv in CLI_RUNS:
        cmd = [sys.executable, "-m", "monoeq.cli", *argv]
        a = subprocess.run(cmd, cwd=SAMPLES, capture_output=True)
        b = subprocess.run(cmd, cwd=SAMPLES, capture_output=True)
        assert (a.returncode, a.stdout, a.stderr) == (b.returncode, b.stdout, b.stderr), argv
        assert a.stdout or a.stderr
    record["detail"] = f"{len(CLI_RUNS)} commands run twice"

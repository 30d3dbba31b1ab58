"""Acceptance suite: one test per criterion, each with its runtime limit.

Every criterion prints a single PASS/FAIL line (also repeated in the pytest
terminal summary). Run standalone with ``python3 tests/test_acceptance.py``.
"""

import itertools
import os
import random
import sys
import time
import traceback

sys.path.insert(0, os.path.dirname(__file__))

import pytest

import lemmas
from cases import E1, E1_3, M1, M2, ROT, TRIB, random_unimodular
from test_decider import column_hits_zero, powers_reach_zero
from matnum.decider import EQUAL, PROPER_SUBSET, Fails, basis_vector_condition, decide_equality
from matnum.digits import DigitSet, synthesize_alphabet
from matnum.encoder import (CONSTRUCTIVE, SEARCH, NotRepresentable, Representation, decode,
                            encode, lift_fractional, search_encode)
from matnum.exactlinalg import ScaledVector, det, is_zero_mod, mat_pow_mod
from matnum.oracle import SearchBudget, brute_force_encode

RESULTS = {}


def record(n, title, limit, fn):
    t0 = time.perf_counter()
    try:
        detail = fn()
        ok, err = True, ""
    except AssertionError as exc:
        detail, ok, err = None, False, str(exc) or "assertion failed"
    except Exception as exc:
        detail, ok, err = None, False, "".join(traceback.format_exception_only(type(exc), exc)).strip()
    dt = time.perf_counter() - t0
    if ok and dt >= limit:
        ok, err = False, f"runtime {dt:.2f}s over the {limit:g}s limit"
    line = f"criterion {n} {'PASS' if ok else 'FAIL'} ({dt:.2f}s / {limit:g}s) {title}"
    line += f": {detail}" if ok and detail else f": {err}" if not ok else ""
    RESULTS[n] = line
    print(line)
    return ok, line


def sv(M, v, k=0):
    return ScaledVector(tuple(v), k, det(M))


# ---- criteria

def criterion_1():
    v = decide_equality(M1)
    assert v.verdict == EQUAL and v.ell == 2, v
    assert is_zero_mod(mat_pow_mod(M1, v.ell, abs(v.delta)), abs(v.delta))
    return f"Equal, ell = {v.ell}, M1^2 = 0 mod 2"


def criterion_2():
    v = decide_equality(M2)
    assert v.verdict == PROPER_SUBSET and v.prime == 2, v
    half = sv(M2, (1, 0), 1)
    lift = lift_fractional(M2, half)
    assert isinstance(lift, NotRepresentable)
    # certified: the residues form a closed cycle that avoids zero
    n = lift.modulus
    step = {c: tuple(sum(a * x for a, x in zip(row, c)) % n for row in M2) for c in lift.cycle}
    assert all(any(c) for c in lift.cycle) and set(step.values()) <= set(lift.cycle)
    S = synthesize_alphabet(M2)
    budget = SearchBudget(-6, 6, 8)
    for digits in (DigitSet(tuple(S.lattice_digits)), DigitSet(((1, 0), (0, 1)))):
        assert brute_force_encode(M2, half, digits, budget) is None
    return f"ProperSubset at p = 2, cycle {list(lift.cycle)}, oracle NotFound in [-6, 6] with 8 terms"


def criterion_3():
    digits = DigitSet(((0, 0), E1))
    longest = 0
    for a, b in itertools.product(range(-5, 6), repeat=2):
        rep, trace = encode(ROT, (a, b), digits, strategy=SEARCH)
        assert trace.strategy == SEARCH
        assert decode(ROT, rep, digits) == sv(ROT, (a, b)), (a, b)
        longest = max(longest, len(rep))
    closed = Representation.from_map({4: E1, 8: E1, 7: E1, 11: E1, 15: E1})
    assert decode(ROT, closed) == sv(ROT, (2, 3))
    return f"121 vectors found (at most {longest} terms), closed form for (2, 3) exact"


def criterion_4():
    digits = DigitSet(((0, 0, 0), E1_3))
    longest = 0
    for z in itertools.product((-1, 0, 1), repeat=3):
        rep, _ = search_encode(TRIB, sv(TRIB, z), digits, k_lo=-10, k_hi=14)
        assert rep is not None, z
        assert all(-10 <= k <= 14 for k in rep.exponents), rep
        assert decode(TRIB, rep, digits) == sv(TRIB, z), z
        longest = max(longest, len(rep))
    return f"27 of 27 representable in [-10, 14] (at most {longest} terms)"


def criterion_5(seed=12345):
    rng = random.Random(seed)
    matrices = cases = 0
    while matrices < 100:
        m = rng.randint(1, 3)
        M = [[rng.randint(-3, 3) for _ in range(m)] for _ in range(m)]
        if det(M) == 0:
            continue
        matrices += 1
        S = synthesize_alphabet(M)
        for _ in range(20):
            z = tuple(rng.randint(-10, 10) for _ in range(m))
            rep, trace = encode(M, z, synthesis=S)
            assert trace.strategy == CONSTRUCTIVE
            assert decode(M, rep, S.alphabet) == sv(M, z), (M, z)
            cases += 1
    return f"{cases} roundtrips over {matrices} matrices"


def criterion_6():
    suites = {
        "claim 1": lemmas.claim1_grid(),
        "claim 2": lemmas.claim2_grid(),
        "unit": lemmas.unit_trials(trials=10_000),
        "contract": lemmas.contract_trials(trials=10_000),
        "expand": lemmas.expand_grid(),
    }
    bad = {k: v[0] for k, v in suites.items() if v[0]}
    assert not bad, f"violations {bad}"
    return ", ".join(f"{k} {v[1]} checks" for k, v in suites.items())


def criterion_7(seed=4):
    rng = random.Random(seed)
    corpus = []
    while len(corpus) < 500:
        m = rng.randint(1, 3)
        M = [[rng.randint(-4, 4) for _ in range(m)] for _ in range(m)]
        if det(M) != 0:
            corpus.append(M)
    disagree = 0
    for M in corpus:
        m = len(M)
        for p in (2, 3, 5):
            disagree += is_zero_mod(mat_pow_mod(M, m, p), p) != powers_reach_zero(M, p)
        equal = decide_equality(M).equal
        conds = [basis_vector_condition(M, i) for i in range(m)]
        disagree += equal != all(not isinstance(c, Fails) for c in conds)
        n = abs(det(M))
        for i, c in enumerate(conds):
            disagree += (None if isinstance(c, Fails) else c) != column_hits_zero(M, i, n)
    assert disagree == 0, f"{disagree} disagreements"
    return "500 matrices, p in {2, 3, 5}, zero disagreements"


def criterion_8(seed=8):
    rng = random.Random(seed)
    encodes = decodes = 0
    for t in range(50):
        m = 1 + t % 3
        M = random_unimodular(rng, m)
        assert abs(det(M)) == 1
        S = synthesize_alphabet(M)
        for _ in range(10):
            z = tuple(rng.randint(-10, 10) for _ in range(m))
            rep, trace = encode(M, z, synthesis=S)
            v = decode(M, rep)
            assert trace.lift == 0 and v.k == 0 and v == sv(M, z), (M, z)
            encodes += 1
        base = list(S.lattice_digits)
        for _ in range(10):
            terms = {rng.randint(-6, 6): rng.choice(base) for _ in range(rng.randint(1, 5))}
            v = decode(M, Representation.from_map(terms))
            assert v.k == 0 and v.is_integer, (M, terms)
            decodes += 1
    return f"{encodes} encodes with exponent 0, {decodes} random decodes in Z^m"


CRITERIA = [
    (1, "M1 decides Equal with witness 2", 1, criterion_1),
    (2, "M2 ProperSubset, (1/2, 0) not representable", 30, criterion_2),
    (3, "rotation with digits {0, e1}", 60, criterion_3),
    (4, "Tribonacci with digits {0, e1}", 300, criterion_4),
    (5, "roundtrip fuzz", 600, criterion_5),
    (6, "lemma property suites", 120, criterion_6),
    (7, "decider validation", 120, criterion_7),
    (8, "det +-1 corpus", 600, criterion_8),
]


@pytest.mark.parametrize("n, title, limit, fn", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(n, title, limit, fn):
    ok, line = record(n, title, limit, fn)
    assert ok, line


if __name__ == "__main__":
    results = [record(*c)[0] for c in CRITERIA]
    sys.exit(0 if all(results) else 1)

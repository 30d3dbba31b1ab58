import itertools
import random

import pytest

from cases import E1, E1_3, M1, M2, ROT, TRIB
from matnum.digits import DigitSet, synthesize_alphabet
from matnum.encoder import Representation, decode, search_encode
from matnum.errors import EnumerationCapExceeded
from matnum.exactlinalg import ScaledVector, det, power_apply
from matnum.oracle import SearchBudget, brute_force_encode, brute_force_reachable

ROT_DIGITS = DigitSet(((0, 0), E1))
TRIB_DIGITS = DigitSet(((0, 0, 0), E1_3))


def sv(M, v, k=0):
    return ScaledVector(tuple(v), k, det(M))


def naive_strings(M, digits, budget):
    """Every digit string over the window, in lexicographic order (positions from
    k_lo upwards, zero digit first), with its exact value."""
    ds = [(0,) * len(M)] + sorted(d for d in digits if any(d))
    n = budget.length
    for s in itertools.product(range(len(ds)), repeat=n):
        if sum(1 for i in s if i) > budget.max_terms:
            continue
        terms = {budget.k_lo + i: ds[di] for i, di in enumerate(s) if di}
        rep = Representation.from_map(terms) if terms else Representation.zero(len(M))
        yield rep, decode(M, rep)


def test_budget_validation():
    with pytest.raises(ValueError):
        SearchBudget(1, 3, 2)
    with pytest.raises(ValueError):
        SearchBudget(-1, 1, 0)
    assert SearchBudget(-2, 3, 1).length == 6


def test_reachable_examples():
    R = brute_force_reachable(ROT, ROT_DIGITS, SearchBudget(0, 7, 8))
    assert sv(ROT, (1, 1)) in R
    assert brute_force_reachable(ROT, DigitSet(((0, 0),)), SearchBudget(-3, 3, 4)) == {sv(ROT, (0, 0))}
    S = synthesize_alphabet(M1)
    small = DigitSet(tuple(S.lattice_digits))
    R1 = brute_force_reachable(M1, small, SearchBudget(-2, 2, 3))
    for v in itertools.product((-1, 0, 1), repeat=2):
        assert sv(M1, v) in R1


@pytest.mark.parametrize("M, digits, budget", [
    (ROT, ROT_DIGITS, SearchBudget(-2, 3, 3)),
    (M1, DigitSet(((1, 0), (0, 1))), SearchBudget(-2, 2, 5)),
    (TRIB, TRIB_DIGITS, SearchBudget(-3, 4, 3)),
    (M2, DigitSet(((1, 0), (-1, 1))), SearchBudget(-1, 2, 4)),
])
def test_reachable_matches_naive(M, digits, budget):
    R = brute_force_reachable(M, digits, budget)
    assert R == {v for _, v in naive_strings(M, digits, budget)}
    # every listed element decodes back to itself through the oracle encoder
    for v in list(R)[:40]:
        rep = brute_force_encode(M, v, digits, budget)
        assert rep is not None and decode(M, rep) == v


@pytest.mark.parametrize("M, digits, budget", [
    (ROT, ROT_DIGITS, SearchBudget(-2, 3, 3)),
    (M1, DigitSet(((1, 0), (0, 1))), SearchBudget(-2, 2, 3)),
    (TRIB, TRIB_DIGITS, SearchBudget(-3, 3, 3)),
])
def test_encode_is_lexicographically_first(M, digits, budget):
    first = {}
    for rep, v in naive_strings(M, digits, budget):
        first.setdefault(v, rep)
    rng = random.Random(1)
    targets = rng.sample(sorted(first, key=lambda v: (v.k, v.num)), min(60, len(first)))
    for v in targets:
        got = brute_force_encode(M, v, digits, budget)
        assert got.terms == first[v].terms


def test_encode_examples():
    rep = brute_force_encode(TRIB, sv(TRIB, E1_3), TRIB_DIGITS, SearchBudget(-4, 4, 4))
    assert rep.terms == ((0, E1_3),)
    two = brute_force_encode(ROT, sv(ROT, (2, 0)), ROT_DIGITS, SearchBudget(0, 11, 4))
    assert two.exponents == [4, 8]
    for w in range(1, 5):
        assert brute_force_encode(M2, sv(M2, (1, 0), 1), DigitSet(((1, 0), (0, 1), (1, 1))),
                                  SearchBudget(-w, w, 4)) is None


def test_rotation_closed_form_exponents():
    # the window starting at 4 forbids the shorter strings at 0
    rep = brute_force_encode(ROT, sv(ROT, (2, 0)), ROT_DIGITS, SearchBudget(0, 11, 4))
    shifted = [k for k, _ in rep.terms]
    assert all(k % 4 == 0 for k in shifted)


def test_not_found_certified_by_exhaustion():
    # (5, 5) needs more than two terms over the rotation alphabet
    budget = SearchBudget(-3, 3, 2)
    assert brute_force_encode(ROT, sv(ROT, (5, 5)), ROT_DIGITS, budget) is None
    assert sv(ROT, (5, 5)) not in brute_force_reachable(ROT, ROT_DIGITS, budget)


def test_enumeration_cap():
    with pytest.raises(EnumerationCapExceeded):
        brute_force_reachable(TRIB, TRIB_DIGITS, SearchBudget(-20, 20, 20, cap=1000))
    with pytest.raises(EnumerationCapExceeded):
        brute_force_encode(TRIB, sv(TRIB, E1_3), TRIB_DIGITS, SearchBudget(-20, 20, 20, cap=1000))


def test_budget_monotonicity():
    small = brute_force_reachable(TRIB, TRIB_DIGITS, SearchBudget(-2, 2, 2))
    wider = brute_force_reachable(TRIB, TRIB_DIGITS, SearchBudget(-3, 3, 2))
    more = brute_force_reachable(TRIB, TRIB_DIGITS, SearchBudget(-3, 3, 3))
    assert small <= wider <= more


def test_search_succeeds_where_oracle_does():
    budget = SearchBudget(-3, 3, 3)
    R = brute_force_reachable(TRIB, TRIB_DIGITS, budget)
    for v in sorted(R, key=lambda v: (v.k, v.num))[:50]:
        rep, _ = search_encode(TRIB, v, TRIB_DIGITS, window=3, max_terms=3)
        assert rep is not None and decode(TRIB, rep) == v
        brute = brute_force_encode(TRIB, v, TRIB_DIGITS, budget)
        assert len(rep) <= len(brute)


def test_fractional_targets():
    budget = SearchBudget(-3, 2, 3)
    R = brute_force_reachable(M1, DigitSet(((1, 0),)), budget)
    fracs = [v for v in R if v.k > 0]
    assert fracs
    for v in fracs[:10]:
        assert power_apply(M1, v, 3).is_integer
        rep = brute_force_encode(M1, v, DigitSet(((1, 0),)), budget)
        assert decode(M1, rep) == v

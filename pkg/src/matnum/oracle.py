"""Brute-force ground truth for small windows.

Everything is scaled by M^-lo so that all partial sums are integer vectors;
hashing then is exact. brute_force_encode splits the window into a low and a
high half (meet in the middle) and returns the lexicographically first digit
string, reading positions from lo upwards with the alphabet order (zero
first).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .errors import EnumerationCapExceeded
from .exactlinalg import ScaledVector, as_matrix, mat_pow, matvec, power_apply
from .encoder import Representation

DEFAULT_CAP = 5_000_000


@dataclass(frozen=True)
class SearchBudget:
    k_lo: int
    k_hi: int
    max_terms: int
    state_bound: int | None = None
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if not self.k_lo <= 0 <= self.k_hi:
            raise ValueError("the window must contain 0")
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")

    @property
    def length(self) -> int:
        return self.k_hi - self.k_lo + 1


def _digits(alphabet):
    ds = [tuple(int(v) for v in d) for d in alphabet]
    m = len(ds[0])
    zero = (0,) * m
    rest = sorted({d for d in ds if d != zero})
    return [zero] + rest


def _count_strings(n_pos: int, n_nonzero: int, max_terms: int) -> int:
    return sum(math.comb(n_pos, j) * n_nonzero ** j for j in range(min(n_pos, max_terms) + 1))


def _strings(n_pos: int, n_digits: int, max_terms: int):
    """Index strings of length n_pos with at most max_terms non-zero entries,
    in lexicographic order."""

    def rec(prefix, left):
        if len(prefix) == n_pos:
            yield tuple(prefix)
            return
        for di in range(n_digits):
            if di and left == 0:
                break
            prefix.append(di)
            yield from rec(prefix, left - (1 if di else 0))
            prefix.pop()

    yield from rec([], max_terms)


def _add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def _scaled_terms(M, digits, n_pos):
    """table[i][di] = M^i d_di for positions i = 0..n_pos-1 (relative to lo)."""
    table = []
    P = None
    for i in range(n_pos):
        P = mat_pow(M, 0) if P is None else P @ M
        table.append([matvec(P, d) for d in digits])
    return table


def _sums(table, digits, positions, max_terms):
    """(index string, count, integer sum) for every string over ``positions``."""
    m = len(digits[0])
    zero = (0,) * m
    for s in _strings(len(positions), len(digits), max_terms):
        acc = zero
        cnt = 0
        for pos, di in zip(positions, s):
            if di:
                acc = _add(acc, table[pos][di])
                cnt += 1
        yield s, cnt, acc


def brute_force_reachable(M, alphabet, budget: SearchBudget) -> set:
    """{ sum_{k in window} M^k d_k : at most max_terms non-zero digits }."""
    M = as_matrix(M)
    digits = _digits(alphabet)
    n = budget.length
    total = _count_strings(n, len(digits) - 1, budget.max_terms)
    if total > budget.cap:
        raise EnumerationCapExceeded(f"{total} strings exceed the cap {budget.cap}")
    table = _scaled_terms(M, digits, n)
    sums = {acc for _, _, acc in _sums(table, digits, range(n), budget.max_terms)}
    return {power_apply(M, ScaledVector(acc, 0, M.det), budget.k_lo) for acc in sums}


def brute_force_encode(M, z: ScaledVector, alphabet, budget: SearchBudget):
    """Lexicographically first representation inside the budget, or None."""
    M = as_matrix(M)
    delta = M.det
    digits = _digits(alphabet)
    m = M.dim
    if not isinstance(z, ScaledVector):
        z = ScaledVector(tuple(z), 0, delta)
    elif z.delta != delta and z.k == 0:
        z = ScaledVector(z.num, 0, delta)
    target = power_apply(M, z, -budget.k_lo)
    if not target.is_integer:
        return None
    target = target.num
    n = budget.length
    half = n // 2
    low_pos = list(range(half))
    high_pos = list(range(half, n))
    nz = len(digits) - 1
    cost = (_count_strings(len(low_pos), nz, budget.max_terms)
            + _count_strings(len(high_pos), nz, budget.max_terms))
    if cost > budget.cap:
        raise EnumerationCapExceeded(f"{cost} strings exceed the cap {budget.cap}")
    table = _scaled_terms(M, digits, n)
    # high table: key = integer sum; value = frontier of (count, string) with
    # counts increasing and strings strictly lexicographically decreasing
    high: dict = {}
    for s, cnt, acc in _sums(table, digits, high_pos, budget.max_terms):
        front = high.setdefault(acc, [])
        if not front:
            front.append((cnt, s))
            continue
        # keep only useful entries: a new entry matters if no entry with a
        # count <= cnt has a smaller or equal string
        if any(c <= cnt and t <= s for c, t in front):
            continue
        front.append((cnt, s))
        front.sort()
        pruned = []
        for c, t in front:
            if not pruned or t < pruned[-1][1]:
                pruned.append((c, t))
        high[acc] = pruned
    if not high:
        return None
    for s, cnt, acc in _sums(table, digits, low_pos, budget.max_terms):
        need = tuple(a - b for a, b in zip(target, acc))
        front = high.get(need)
        if not front:
            continue
        left = budget.max_terms - cnt
        best = None
        for c, t in front:
            if c <= left:
                best = t
        if best is None:
            continue
        full = s + best
        terms = {budget.k_lo + i: digits[di] for i, di in enumerate(full) if di}
        if not terms:
            return Representation.zero(m)
        return Representation.from_map(terms)
    return None

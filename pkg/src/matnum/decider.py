"""Decide whether every Delta-adic vector is representable.

Fin(M) equals the union of Delta^-k Z^m exactly when some power of M vanishes
mod Delta. By the Chinese remainder theorem that splits into one nilpotency
test per prime p | Delta, and over the field Z/p a nilpotent m x m matrix
already satisfies M^m = 0.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import FactorizationLimit, SingularMatrix
from .exactlinalg import (ScaledVector, apply_inverse, as_matrix, is_zero_mod, mat_pow_mod,
                          matvec, multiply)
from .encoder import decode, encode, find_cycle, shift

EQUAL = "Equal"
PROPER_SUBSET = "ProperSubset"

TRIAL_LIMIT = 10 ** 6


def factorize(n: int, limit: int = TRIAL_LIMIT) -> dict[int, int]:
    """Prime factorisation by trial division up to ``limit``.

    A leftover cofactor below limit^2 is prime; anything larger raises
    FactorizationLimit.
    """
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor zero")
    out: dict[int, int] = {}
    p = 2
    while p * p <= n and p <= limit:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        if n > limit * limit:
            raise FactorizationLimit(f"cofactor {n} exceeds the trial-division range")
        out[n] = out.get(n, 0) + 1
    return out


@dataclass(frozen=True)
class EqualityVerdict:
    verdict: str
    delta: int
    ell: int | None = None
    prime: int | None = None
    residue: tuple | None = None
    column: int | None = None
    cycle: tuple = field(default=())

    @property
    def equal(self) -> bool:
        return self.verdict == EQUAL

    def to_dict(self) -> dict:
        d = {"verdict": self.verdict, "delta": self.delta}
        if self.equal:
            d["witness"] = {"ell": self.ell}
        else:
            d["witness"] = {"prime": self.prime,
                            "residue": [list(r) for r in self.residue],
                            "column": self.column,
                            "cycle": [list(v) for v in self.cycle]}
        return d

    def __str__(self):
        if self.equal:
            return f"Equal (ℓ={self.ell})"
        return f"ProperSubset (p={self.prime})"


def _column_cycle(M, p: int, col: int):
    """Orbit of the column e_col under v -> M v mod p; returns the cycle states."""
    m = M.dim
    e = tuple(1 if i == col else 0 for i in range(m))

    def f(v):
        return tuple(x % p for x in matvec(M, v))

    return find_cycle(f, e, lambda v: not any(v))


def decide_equality(M) -> EqualityVerdict:
    """Equal with the least ell such that M^ell = 0 mod |Delta|, or
    ProperSubset with a prime p | Delta over which M is not nilpotent."""
    M = as_matrix(M)
    m = M.dim
    delta = M.det
    if delta == 0:
        raise SingularMatrix("matrix is singular")
    if abs(delta) == 1:
        return EqualityVerdict(EQUAL, delta, ell=0)
    primes = factorize(delta)
    for p in sorted(primes):
        if not is_zero_mod(mat_pow_mod(M, m, p), p):
            # a column whose orbit mod p never reaches zero is the witness
            for col in range(m):
                kind, data = _column_cycle(M, p, col)
                if kind == "cycle":
                    break
            residue = mat_pow_mod(M, 1, p).rows
            return EqualityVerdict(PROPER_SUBSET, delta, prime=p, residue=residue,
                                   column=col, cycle=tuple(tuple(v) for v in data))
    # M^m = 0 mod p implies M^(m e) = 0 mod p^e
    n = abs(delta)
    ell = m * max(primes.values())
    while ell > 0 and is_zero_mod(mat_pow_mod(M, ell - 1, n), n):
        ell -= 1
    assert is_zero_mod(mat_pow_mod(M, ell, n), n)
    return EqualityVerdict(EQUAL, delta, ell=ell)


@dataclass(frozen=True)
class Fails:
    column: int
    modulus: int
    cycle: tuple


def basis_vector_condition(M, i: int):
    """Least ell with column i (0-based) of M^ell divisible by Delta, else Fails
    with the cycle of that column mod |Delta|."""
    M = as_matrix(M)
    delta = M.det
    if delta == 0:
        raise SingularMatrix("matrix is singular")
    n = abs(delta)
    if n == 1:
        return 0
    kind, data = _column_cycle(M, n, i)
    if kind == "hit":
        return data
    return Fails(i, n, tuple(data))


@dataclass
class ClosureReport:
    samples: int
    checks: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"samples": self.samples, "checks": self.checks,
                "failures": [str(f) for f in self.failures]}


def check_fin_properties(M, alphabet, samples: int = 50, seed: int = 0, radius: int = 6,
                         **encode_kw) -> ClosureReport:
    """Encode random pairs x, y and check that x + y, x - y, M x and M^-1 x
    encode and decode back exactly."""
    M = as_matrix(M)
    m = M.dim
    delta = M.det
    rng = random.Random(seed)
    report = ClosureReport(samples)
    for _ in range(samples):
        x = ScaledVector(tuple(rng.randint(-radius, radius) for _ in range(m)), 0, delta)
        y = ScaledVector(tuple(rng.randint(-radius, radius) for _ in range(m)), 0, delta)
        targets = {"x+y": x + y, "x-y": x - y, "Mx": multiply(M, x),
                   "M^-1 x": apply_inverse(M, x)}
        for name, v in targets.items():
            report.checks += 1
            try:
                rep, _ = encode(M, v, alphabet, **encode_kw)
                if decode(M, rep) != v:
                    report.failures.append((name, x.num, y.num, "decode mismatch"))
            except Exception as exc:  # reported, not raised
                report.failures.append((name, x.num, y.num, repr(exc)))
        if not (x.is_zero()):
            report.checks += 1
            try:
                rep, _ = encode(M, x, alphabet, **encode_kw)
                if decode(M, shift(rep, 1)) != multiply(M, x):
                    report.failures.append(("shift", x.num, y.num, "shift mismatch"))
            except Exception as exc:
                report.failures.append(("shift", x.num, y.num, repr(exc)))
    return report

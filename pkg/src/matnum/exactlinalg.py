"""Exact integer and rational matrix arithmetic.

Everything here works on Python integers (and ``fractions.Fraction`` where a
field is needed), so results are exact at any size. Matrices are stored as
tuples of row tuples inside :class:`IntMatrix`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .errors import SingularMatrix


def _as_rows(entries) -> tuple[tuple[int, ...], ...]:
    rows = tuple(tuple(int(v) for v in row) for row in entries)
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ValueError("matrix must be square and non-empty")
    for row, src in zip(rows, entries):
        for v, s in zip(row, src):
            if v != s:
                raise ValueError(f"non-integer entry {s!r}")
    return rows


@dataclass(frozen=True)
class IntMatrix:
    """Square integer matrix. The determinant is cached on first use."""

    rows: tuple[tuple[int, ...], ...]

    def __init__(self, entries):
        if isinstance(entries, IntMatrix):
            entries = entries.rows
        elif hasattr(entries, "tolist"):
            entries = entries.tolist()
        object.__setattr__(self, "rows", _as_rows(entries))

    @property
    def dim(self) -> int:
        return len(self.rows)

    @cached_property
    def det(self) -> int:
        return det(self)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other):
        if isinstance(other, IntMatrix):
            return matmul(self, other)
        return matvec(self, other)

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self.rows)

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def to_json(self) -> str:
        return json.dumps(self.tolist())

    @classmethod
    def from_json(cls, text: str) -> "IntMatrix":
        return cls(json.loads(text))

    @classmethod
    def identity(cls, m: int) -> "IntMatrix":
        return cls([[int(i == j) for j in range(m)] for i in range(m)])

    @classmethod
    def zeros(cls, m: int) -> "IntMatrix":
        return cls([[0] * m for _ in range(m)])

    def __repr__(self):
        return f"IntMatrix({self.tolist()})"


def as_matrix(M) -> IntMatrix:
    return M if isinstance(M, IntMatrix) else IntMatrix(M)


def identity(m: int) -> IntMatrix:
    return IntMatrix.identity(m)


def matmul(A: IntMatrix, B: IntMatrix) -> IntMatrix:
    A, B = as_matrix(A), as_matrix(B)
    cols = list(zip(*B.rows))
    return IntMatrix([[sum(a * b for a, b in zip(row, col)) for col in cols] for row in A.rows])


def matvec(A: IntMatrix, v: Sequence[int]) -> tuple[int, ...]:
    return tuple(sum(a * x for a, x in zip(row, v)) for row in A.rows)


def mat_add(A: IntMatrix, B: IntMatrix, scale: int = 1) -> IntMatrix:
    return IntMatrix([[a + scale * b for a, b in zip(ra, rb)] for ra, rb in zip(A.rows, B.rows)])


def mat_pow(M: IntMatrix, e: int) -> IntMatrix:
    """M**e for e >= 0 by repeated squaring."""
    M = as_matrix(M)
    if e < 0:
        raise ValueError("negative exponent; use apply_inverse")
    result = identity(M.dim)
    base = M
    while e:
        if e & 1:
            result = matmul(result, base)
        e >>= 1
        if e:
            base = matmul(base, base)
    return result


def _reduce(A: IntMatrix, n: int) -> IntMatrix:
    return IntMatrix([[a % n for a in row] for row in A.rows])


def mat_pow_mod(M, e: int, n: int) -> IntMatrix:
    """M**e with every entry reduced into [0, n)."""
    M = as_matrix(M)
    if n < 2:
        raise ValueError("modulus must be at least 2")
    if e < 0:
        raise ValueError("exponent must be non-negative")
    result = _reduce(identity(M.dim), n)
    base = _reduce(M, n)
    while e:
        if e & 1:
            result = _reduce(matmul(result, base), n)
        e >>= 1
        if e:
            base = _reduce(matmul(base, base), n)
    return result


def is_zero_mod(A: IntMatrix, n: int) -> bool:
    return all(a % n == 0 for row in A.rows for a in row)


def det(M) -> int:
    """Determinant by Bareiss fraction-free elimination."""
    M = as_matrix(M)
    a = [list(r) for r in M.rows]
    m = len(a)
    sign = 1
    prev = 1
    for k in range(m - 1):
        if a[k][k] == 0:
            for i in range(k + 1, m):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, m):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, m):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    return sign * a[m - 1][m - 1]


def rank(M) -> int:
    """Rank over Q of an integer matrix (need not be square)."""
    a = [list(int(v) for v in r) for r in (M.rows if isinstance(M, IntMatrix) else M)]
    if not a:
        return 0
    n_rows, n_cols = len(a), len(a[0])
    r = 0
    prev = 1
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        for i in range(r + 1, n_rows):
            f = a[i][c]
            a[i] = [(a[i][j] * p - f * a[r][j]) // prev for j in range(n_cols)]
        prev = p
        r += 1
        if r == n_rows:
            break
    return r


def nullspace(rows: Sequence[Sequence], n_cols: int | None = None) -> list[list[Fraction]]:
    """Basis of the right null space over Q via reduced row echelon form."""
    a = [[Fraction(v) for v in r] for r in rows]
    if n_cols is None:
        n_cols = len(a[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n_cols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -a[i][fc]
        basis.append(v)
    return basis


def primitive(v: Iterable[Fraction]) -> tuple[int, ...]:
    """Scale a rational vector to the primitive integer vector on the same ray."""
    from math import gcd, lcm

    v = [Fraction(x) for x in v]
    den = lcm(*(x.denominator for x in v)) if v else 1
    ints = [int(x * den) for x in v]
    g = gcd(*ints)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


@dataclass(frozen=True)
class IntPolynomial:
    """Monic integer polynomial, coefficients from the leading term down."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if not self.coeffs:
            raise ValueError("empty polynomial")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_monic(self) -> bool:
        return self.coeffs[0] == 1

    def __call__(self, x):
        acc = 0
        for c in self.coeffs:
            acc = acc * x + c
        return acc

    def at_matrix(self, M: IntMatrix) -> IntMatrix:
        """Horner evaluation p(M), exact."""
        M = as_matrix(M)
        m = M.dim
        acc = IntMatrix.zeros(m)
        for c in self.coeffs:
            acc = matmul(acc, M)
            acc = IntMatrix([[v + (c if i == j else 0) for j, v in enumerate(row)]
                             for i, row in enumerate(acc.rows)])
        return acc

    def __str__(self):
        terms = []
        d = self.degree
        for i, c in enumerate(self.coeffs):
            p = d - i
            if c == 0:
                continue
            mono = "" if p == 0 else ("x" if p == 1 else f"x^{p}")
            if mono and abs(c) == 1:
                coef = "-" if c < 0 else "+"
                terms.append(f"{coef}{mono}")
            else:
                terms.append(f"{c:+d}{mono}")
        s = "".join(terms) or "0"
        return s[1:] if s.startswith("+") else s


def _faddeev(M: IntMatrix):
    """Faddeev-LeVerrier recurrence; returns (coeffs high->low, M_n).

    All divisions are exact over the integers.
    """
    m = M.dim
    c = [0] * (m + 1)
    c[m] = 1
    Mk = IntMatrix.zeros(m)
    for k in range(1, m + 1):
        AM = matmul(M, Mk)
        Mk = IntMatrix([[v + (c[m - k + 1] if i == j else 0) for j, v in enumerate(row)]
                        for i, row in enumerate(AM.rows)])
        tr = sum(matmul(M, Mk).rows[i][i] for i in range(m))
        q, r = divmod(-tr, k)
        assert r == 0
        c[m - k] = q
    return tuple(reversed(c)), Mk


def char_poly(M) -> IntPolynomial:
    """det(xI - M) as a monic integer polynomial."""
    coeffs, _ = _faddeev(as_matrix(M))
    return IntPolynomial(coeffs)


def adjugate(M) -> IntMatrix:
    """Integer matrix A with M A = A M = det(M) I."""
    M = as_matrix(M)
    m = M.dim
    if m == 1:
        return IntMatrix([[1]])
    _, Mn = _faddeev(M)
    sign = 1 if m % 2 == 1 else -1
    return IntMatrix([[sign * v for v in row] for row in Mn.rows])


@dataclass(frozen=True)
class ScaledVector:
    """The vector ``num / delta**k`` kept in lowest terms.

    ``delta`` is the ambient determinant. Normalisation strips common factors
    of ``delta`` from ``num`` until ``k == 0`` or some entry is not divisible,
    so two equal values always compare equal.
    """

    num: tuple[int, ...]
    k: int = 0
    delta: int = 1

    def __post_init__(self):
        if self.delta == 0:
            raise SingularMatrix("ScaledVector needs a non-zero delta")
        if self.k < 0:
            raise ValueError("denominator exponent must be non-negative")
        num = tuple(int(v) for v in self.num)
        k = self.k
        d = self.delta
        if abs(d) == 1:
            if k % 2 and d == -1:
                num = tuple(-v for v in num)
            k = 0
        else:
            while k > 0 and all(v % d == 0 for v in num):
                num = tuple(v // d for v in num)
                k -= 1
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "k", k)

    @classmethod
    def integer(cls, v: Sequence[int], delta: int = 1) -> "ScaledVector":
        return cls(tuple(v), 0, delta)

    @property
    def dim(self) -> int:
        return len(self.num)

    @property
    def is_integer(self) -> bool:
        return self.k == 0

    def fractions(self) -> tuple[Fraction, ...]:
        den = self.delta ** self.k
        return tuple(Fraction(v, den) for v in self.num)

    def to_float(self):
        import numpy as np

        return np.array([float(f) for f in self.fractions()])

    def is_zero(self) -> bool:
        return not any(self.num)

    def __add__(self, other: "ScaledVector") -> "ScaledVector":
        self._check(other)
        k = max(self.k, other.k)
        a = [v * self.delta ** (k - self.k) for v in self.num]
        b = [v * other.delta ** (k - other.k) for v in other.num]
        return ScaledVector(tuple(x + y for x, y in zip(a, b)), k, self.delta)

    def __neg__(self):
        return ScaledVector(tuple(-v for v in self.num), self.k, self.delta)

    def __sub__(self, other: "ScaledVector") -> "ScaledVector":
        return self + (-other)

    def _check(self, other):
        if self.delta != other.delta or self.dim != other.dim:
            raise ValueError("incompatible ScaledVectors")

    def __str__(self):
        if self.k == 0:
            return "(" + ", ".join(map(str, self.num)) + ")"
        return "(" + ", ".join(map(str, self.num)) + f") / ({self.delta})^{self.k}"

    def to_dict(self) -> dict:
        return {"num": list(self.num), "k": self.k, "delta": self.delta}


def multiply(M, v: ScaledVector) -> ScaledVector:
    """M v, exact."""
    M = as_matrix(M)
    return ScaledVector(matvec(M, v.num), v.k, v.delta)


def apply_inverse(M, v: ScaledVector) -> ScaledVector:
    """M^{-1} v computed as adj(M) v / det(M), normalised."""
    M = as_matrix(M)
    d = M.det
    if d == 0:
        raise SingularMatrix("matrix is singular")
    if v.delta != d:
        v = rebase(v, d)
    return ScaledVector(matvec(adjugate(M), v.num), v.k + 1, d)


def rebase(v: ScaledVector, delta: int) -> ScaledVector:
    """Re-express an integer-valued ScaledVector against another delta."""
    if v.k != 0:
        raise ValueError("only integer vectors can change their ambient delta")
    return ScaledVector(v.num, 0, delta)


def power_apply(M, v: ScaledVector, t: int) -> ScaledVector:
    """M^t v for any integer t."""
    M = as_matrix(M)
    if v.delta != M.det:
        v = rebase(v, M.det)
    if t >= 0:
        return ScaledVector(matvec(mat_pow(M, t), v.num), v.k, v.delta)
    adj_t = mat_pow(adjugate(M), -t)
    return ScaledVector(matvec(adj_t, v.num), v.k - t, v.delta)

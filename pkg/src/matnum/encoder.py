"""Finite representations z = sum_k M^k d_k: decoding, shifting, and two encoders.

The constructive encoder follows the lattice argument: pull z back by M^-j
until its expanding Jordan part is small, then iterate c -> M c - a with
digits chosen per Jordan block on the floating coordinates P c, while the
state c itself stays exact. Once P c is inside the C-ball the remainder is a
lattice digit and is absorbed into the last digit.

The search encoder is exhaustive over an exponent window and needs no Jordan
data, so it also works for hand-picked alphabets such as {0, e1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (AlphabetMismatch, EncodeBudgetExceeded, MatnumError,
                     NotRepresentableError)
from .exactlinalg import (IntMatrix, ScaledVector, adjugate, as_matrix, char_poly, mat_pow,
                          matvec, multiply, nullspace, power_apply)
from .jordan import EXPANDING_BLOCK, UNIMODULAR_COMPLEX, UNIMODULAR_REAL

CONSTRUCTIVE = "constructive"
SEARCH = "search"
AUTO = "auto"


# ---------------------------------------------------------------- data model

@dataclass(frozen=True)
class Representation:
    """Finite map exponent -> non-zero digit vector.

    The value zero is stored canonically as {0: zero vector} so the exponent
    set is never empty.
    """

    terms: tuple[tuple[int, tuple[int, ...]], ...]
    alphabet_id: str = ""

    def __post_init__(self):
        items = {}
        dim = None
        for k, d in self.terms:
            d = tuple(int(v) for v in d)
            dim = len(d)
            if k in items:
                raise ValueError(f"exponent {k} used twice")
            items[int(k)] = d
        nz = sorted((k, d) for k, d in items.items() if any(d))
        if not nz:
            if dim is None:
                raise ValueError("a representation needs at least one term")
            nz = [(0, (0,) * dim)]
        object.__setattr__(self, "terms", tuple(nz))

    @classmethod
    def zero(cls, dim: int, alphabet_id: str = "") -> "Representation":
        return cls(((0, (0,) * dim),), alphabet_id)

    @classmethod
    def from_map(cls, mapping: dict, alphabet_id: str = "") -> "Representation":
        return cls(tuple(mapping.items()), alphabet_id)

    @property
    def dim(self) -> int:
        return len(self.terms[0][1])

    @property
    def exponents(self) -> list[int]:
        return [k for k, _ in self.terms]

    @property
    def is_zero(self) -> bool:
        return not any(self.terms[0][1])

    def as_dict(self) -> dict:
        return dict(self.terms)

    def __len__(self):
        return 0 if self.is_zero else len(self.terms)

    def indices(self, alphabet) -> list[tuple[int, int]]:
        """(exponent, digit index) pairs for an explicit DigitSet."""
        return [(k, alphabet.index(d)) for k, d in self.terms]

    def to_dict(self, matrix=None, alphabet=None) -> dict:
        out = {}
        if matrix is not None:
            out["matrix"] = as_matrix(matrix).tolist()
        if alphabet is not None:
            out["alphabet"] = _alphabet_json(alphabet)
        out["alphabet_id"] = self.alphabet_id
        out["terms"] = [[k, list(d)] for k, d in self.terms]
        return out

    @classmethod
    def from_dict(cls, d) -> "Representation":
        return cls(tuple((int(k), tuple(v)) for k, v in d["terms"]), d.get("alphabet_id", ""))

    def __str__(self):
        return " + ".join(f"M^{k}{d}" for k, d in self.terms)


def _alphabet_json(alphabet):
    if hasattr(alphabet, "to_dict"):
        d = alphabet.to_dict()
        if d.get("type") == "digit-set":
            return d["digits"]
        return d
    return [list(v) for v in alphabet]


@dataclass
class EncodeTrace:
    strategy: str
    j: int = 0
    N: int = 0
    lift: int = 0
    index_history: list = field(default_factory=list)
    pair_norms: list = field(default_factory=list)
    remainder: tuple | None = None
    digits: list = field(default_factory=list)
    window: tuple | None = None
    states_visited: int = 0

    def summary(self) -> dict:
        return {"strategy": self.strategy, "j": self.j, "N": self.N, "lift": self.lift,
                "remainder": list(self.remainder) if self.remainder is not None else None,
                "window": list(self.window) if self.window is not None else None,
                "states_visited": self.states_visited}


@dataclass(frozen=True)
class Lift:
    z: tuple[int, ...]
    shift: int


@dataclass(frozen=True)
class NotRepresentable:
    """Certified: no power M^n v is integral. ``cycle`` lists the numerators
    mod |delta|^k along the detected cycle, none of which is zero."""

    v: ScaledVector
    modulus: int
    cycle: tuple[tuple[int, ...], ...]


# ---------------------------------------------------------------- exact ops

def _check_alphabet(rep: Representation, alphabet):
    if alphabet is None:
        return
    for k, d in rep.terms:
        if any(d) and d not in alphabet:
            raise AlphabetMismatch(f"digit {d} at exponent {k} is not in the alphabet")


def decode(M, rep: Representation, alphabet=None) -> ScaledVector:
    """Exact value of sum_k M^k d_k.

    With n = max(0, -min k), u = sum_k M^(k+n) d_k is an integer vector and the
    value is M^-n u.
    """
    M = as_matrix(M)
    _check_alphabet(rep, alphabet)
    lo = rep.terms[0][0]
    n = max(0, -lo)
    hi = rep.terms[-1][0]
    digits = rep.as_dict()
    u = (0,) * rep.dim
    for k in range(hi, lo - 1, -1):
        u = matvec(M, u)
        d = digits.get(k)
        if d is not None:
            u = tuple(a + b for a, b in zip(u, d))
    # u now equals sum_k M^(k - lo) d_k
    return power_apply(M, ScaledVector(u, 0, M.det), lo)


def shift(rep: Representation, t: int) -> Representation:
    if rep.is_zero:
        return rep
    return Representation(tuple((k + t, d) for k, d in rep.terms), rep.alphabet_id)


def find_cycle(f, x0, is_target):
    """Floyd tortoise-and-hare on x0, f(x0), f(f(x0)), ...

    Returns ("hit", n) for the first n with is_target(x_n), or ("cycle", list)
    with the states of the cycle when the orbit loops without a hit.
    """
    # first scan the pre-period and one full cycle; Floyd bounds both
    tort, hare = f(x0), f(f(x0))
    while tort != hare:
        tort, hare = f(tort), f(f(hare))
    mu = 0
    tort = x0
    while tort != hare:
        tort, hare = f(tort), f(hare)
        mu += 1
    lam = 1
    hare = f(tort)
    while tort != hare:
        hare = f(hare)
        lam += 1
    x = x0
    for n in range(mu + lam):
        if is_target(x):
            return "hit", n
        x = f(x)
    cyc = []
    x = tort
    for _ in range(lam):
        cyc.append(x)
        x = f(x)
    return "cycle", cyc


def lift_fractional(M, v: ScaledVector):
    """Smallest n >= 0 with M^n v integral, as Lift(M^n v, n), or a certified
    NotRepresentable when the orbit of the numerator mod |delta|^k cycles
    without reaching zero."""
    M = as_matrix(M)
    d = M.det
    if v.delta != d:
        if v.k:
            raise ValueError("vector denominator does not match det(M)")
        v = ScaledVector(v.num, 0, d)
    if v.k == 0:
        return Lift(v.num, 0)
    mod = abs(d) ** v.k

    def f(x):
        return tuple(a % mod for a in matvec(M, x))

    x0 = tuple(a % mod for a in v.num)
    kind, data = find_cycle(f, x0, lambda x: not any(x))
    if kind == "cycle":
        return NotRepresentable(v, mod, tuple(data))
    w = power_apply(M, v, data)
    assert w.k == 0
    return Lift(w.num, data)


# ---------------------------------------------------------------- constructive

def _bits(z) -> int:
    return max((abs(int(v)).bit_length() for v in z), default=0)


def _jordan_coords(plan, v: ScaledVector) -> np.ndarray:
    return plan.P @ v.to_float()


STEP_CEILING = 2_000_000


def step_cap(synthesis, z, x, j: int) -> int:
    """Default number of digit steps before giving up.

    1000 m + 10 bits(z) covers the expanding and contracting parts. On a
    unimodular block the coordinates only shrink by a bounded amount per step,
    and a chain of length L needs on the order of size^L steps, so those blocks
    add an allowance of that shape. The total is capped at STEP_CEILING.
    """
    m = synthesis.matrix.dim
    n = 1000 * m + 10 * _bits(z)
    for bp in synthesis.block_plans:
        if bp.kind not in (UNIMODULAR_COMPLEX, UNIMODULAR_REAL):
            continue
        size = float(np.abs(x[bp.block.slice]).max()) + bp.C + j
        n += math.ceil(4 * size) ** bp.block.chain_length
        if n >= STEP_CEILING:
            return STEP_CEILING
    return n


# exact states above this size are not converted to floats: P c would lose the
# small coordinates to cancellation against a large contracting one
_RESYNC_BITS = 30


def _log2_size(v: ScaledVector) -> float:
    top = max(abs(a) for a in v.num).bit_length()
    return top - v.k * math.log2(abs(v.delta)) if top else -math.inf


def constructive_encode(synthesis, z: ScaledVector, max_steps: int | None = None):
    """Encode an integer vector with the synthesised alphabet."""
    M = synthesis.matrix
    plan = synthesis.plan
    m = M.dim
    delta = M.det
    trace = EncodeTrace(CONSTRUCTIVE)
    alphabet = synthesis.alphabet
    if z.is_zero():
        return Representation.zero(m, alphabet.alphabet_id), trace
    if not z.is_integer:
        raise ValueError("constructive encoding needs an integer vector")
    C = synthesis.C
    emask = plan.mask("e")
    Jinv = plan.Jinv
    x = plan.P @ np.array(z.num, dtype=float)
    j = 0
    while emask.any() and np.abs(x[emask]).max() >= 1:
        x = Jinv @ x
        j += 1
    trace.j = j
    c = power_apply(M, ScaledVector(z.num, 0, delta), -j)
    # x is carried through x <- J x - P a, which keeps the Jordan blocks
    # decoupled; it is refreshed from the exact state whenever that is small
    n_max = max_steps if max_steps is not None else step_cap(synthesis, z.num, x, j)
    unit = [bp for bp in synthesis.block_plans if bp.kind in (UNIMODULAR_COMPLEX, UNIMODULAR_REAL)]
    digits = []
    stop = C * (1 - 1e-9)
    N = 0
    while True:
        if _log2_size(c) < _RESYNC_BITS:
            x = _jordan_coords(plan, c)
        if unit:
            trace.index_history.append(tuple(bp.index(x[bp.block.slice]) for bp in unit))
            trace.pair_norms.append(tuple(tuple(bp.pair_norms(x[bp.block.slice])) for bp in unit))
        if N >= j and np.abs(x).max() <= stop:
            break
        if N >= n_max:
            raise EncodeBudgetExceeded(f"no bounded remainder after {N} steps")
        dt = synthesis.select(x)
        a = synthesis.lattice_digit(dt)
        digits.append(a)
        c = multiply(M, c) - ScaledVector(a, 0, delta)
        x = plan.J @ x - plan.P @ np.asarray(a, dtype=float)
        N += 1
    assert c.is_integer
    y = c.num
    trace.N = N
    trace.remainder = y
    terms = {}
    for k, a in enumerate(digits, start=1):
        terms[j - k] = a
    last = j - N
    base = terms.get(last, (0,) * m)
    folded = tuple(p + q for p, q in zip(base, y))
    if any(folded) and folded not in alphabet:
        raise AlphabetMismatch(f"folded digit {folded} is not in the alphabet")
    terms[last] = folded
    trace.digits = digits
    return Representation.from_map(terms, alphabet.alphabet_id), trace


# ---------------------------------------------------------------- search

@dataclass(frozen=True)
class _Bound:
    u: np.ndarray       # left eigenvector (complex allowed)
    mu: complex
    dmax: float
    tol: float


def eigen_bounds(M: IntMatrix, digits, tol: float = 1e-7) -> list[_Bound]:
    """Left-eigenvector bounds |u^T w| <= max_d |u^T d| * sum_{i<r} |mu|^i that
    every state w with r remaining positions must satisfy.

    Rational eigenvalues use exact eigenvectors; irrational ones are used only
    when simple (numerical eigenvectors are then well defined).
    """
    from .spectrum import classify

    split = classify(char_poly(M))
    mult = dict(split.factors)
    D = np.array(list(digits), dtype=float).reshape(-1, M.dim)
    out = []
    Mt = IntMatrix([list(r) for r in zip(*M.rows)])
    Mf = np.array(M.rows, dtype=float)
    seen = set()
    for root in split.roots:
        f = root.factor
        if len(f) == 2:
            if f in seen:
                continue
            seen.add(f)
            lam = Fraction(-f[1], f[0])
            rows = [[Fraction(Mt.rows[i][jj]) - (lam if i == jj else 0) for jj in range(M.dim)]
                    for i in range(M.dim)]
            for vec in nullspace(rows, M.dim):
                u = np.array([float(x) for x in vec])
                u = u / np.abs(u).max()
                out.append(_Bound(u, complex(float(lam)), float(np.abs(D @ u).max()), 1e-9))
        elif mult[f] == 1:
            if not root.is_real and root.value.imag < 0:
                continue
            w, V = np.linalg.eig(Mf.T)
            i = int(np.argmin(np.abs(w - root.value)))
            u = V[:, i] / np.abs(V[:, i]).max()
            out.append(_Bound(u, root.value, float(np.abs(D @ u).max()), tol))
    return out


def _radius(b: _Bound, r: int) -> float:
    a = abs(b.mu)
    if r <= 0:
        return 0.0
    s = float(r) if abs(a - 1) < 1e-15 else (a ** r - 1) / (a - 1)
    return b.dmax * s * (1 + b.tol) + b.tol


class _Stepper:
    """w -> M^-1 (w - d) restricted to integer results."""

    def __init__(self, M: IntMatrix, digits):
        self.M = M
        self.delta = M.det
        self.adj = adjugate(M)
        self.digits = [tuple(d) for d in digits]

    def step(self, w, d):
        diff = tuple(a - b for a, b in zip(w, d))
        num = matvec(self.adj, diff)
        if self.delta in (1, -1):
            return tuple(v * self.delta for v in num)
        if any(v % self.delta for v in num):
            return None
        return tuple(v // self.delta for v in num)


def _window_search(M, w0, stepper, bounds, lo, hi, max_terms, state_cap):
    """Lexicographically least string (positions lo..hi, digit order of the
    alphabet) with the fewest non-zero terms; None if none exists."""
    digits = stepper.digits
    n_pos = hi - lo + 1
    layer = {(w0, 0): ()}
    visited = 0
    for pos in range(n_pos):
        r_after = n_pos - pos - 1
        nxt = {}
        for (w, cnt), prefix in layer.items():
            for di, d in enumerate(digits):
                nz = 1 if any(d) else 0
                if cnt + nz > max_terms:
                    continue
                w2 = stepper.step(w, d)
                if w2 is None:
                    continue
                if r_after == 0:
                    if any(w2):
                        continue
                else:
                    wf = np.array(w2, dtype=float)
                    if any(abs(b.u @ wf) > _radius(b, r_after) for b in bounds):
                        continue
                key = (w2, cnt + nz)
                cand = prefix + (di,)
                old = nxt.get(key)
                if old is None or cand < old:
                    nxt[key] = cand
        layer = nxt
        visited += len(layer)
        if len(layer) > state_cap:
            raise EncodeBudgetExceeded(f"search state space exceeded {state_cap} states")
    best = None
    for (w, cnt), s in layer.items():
        if not any(w) and (best is None or (cnt, s) < best):
            best = (cnt, s)
    if best is None:
        return None, visited
    return {lo + i: digits[di] for i, di in enumerate(best[1]) if di != 0}, visited


def search_encode(M, z: ScaledVector, alphabet, window=None, max_terms: int = 12,
                  state_cap: int = 2_000_000, k_lo=None, k_hi=None):
    """Exhaustive search for a representation with digits from an explicit alphabet.

    Windows [-w, w] are tried for w = 0, 1, ... up to ``window`` (clipped to
    [k_lo, k_hi] when given); in the first window that admits one, the result
    has the fewest non-zero terms and is lexicographically least among those.
    Returns (None, trace) when nothing exists within the budget.
    """
    from .digits import DigitSet

    M = as_matrix(M)
    delta = M.det
    m = M.dim
    if not isinstance(alphabet, DigitSet):
        alphabet = DigitSet(tuple(tuple(d) for d in alphabet))
    digits = list(alphabet)
    aid = getattr(alphabet, "alphabet_id", "")
    trace = EncodeTrace(SEARCH)
    if z.delta != delta and z.k == 0:
        z = ScaledVector(z.num, 0, delta)
    if z.is_zero():
        return Representation.zero(m, aid), trace
    if window is None:
        window = 12
    stepper = _Stepper(M, digits)
    bounds = eigen_bounds(M, digits)
    for w in range(0, window + 1):
        lo = -w if k_lo is None else max(-w, k_lo)
        hi = w if k_hi is None else min(w, k_hi)
        if lo > hi:
            continue
        if w > 0 and (lo, hi) == trace.window:
            continue
        trace.window = (lo, hi)
        w0 = power_apply(M, z, -lo)
        if not w0.is_integer:
            continue
        terms, visited = _window_search(M, w0.num, stepper, bounds, lo, hi, max_terms, state_cap)
        trace.states_visited += visited
        if terms is not None:
            rep = Representation.from_map(terms, aid) if terms else Representation.zero(m, aid)
            return rep, trace
    return None, trace


# ---------------------------------------------------------------- front door

def encode(M, z, alphabet=None, plan=None, strategy: str = AUTO, synthesis=None,
           window=None, max_terms: int = 12, max_steps=None):
    """Encode z (integer or Delta-scaled) as a finite representation.

    ``synthesis`` (from digits.synthesize_alphabet), or a Jordan ``plan`` to
    build one from, enables the constructive strategy. Fractional inputs are first lifted to integers with
    lift_fractional and the result shifted back. Raises NotRepresentableError
    when the lift fails.
    """
    from .digits import Synthesis, SumAlphabet

    M = as_matrix(M)
    if not isinstance(z, ScaledVector):
        z = ScaledVector(tuple(z), 0, M.det)
    elif z.delta != M.det:
        if z.k:
            raise ValueError("vector denominator does not match det(M)")
        z = ScaledVector(z.num, 0, M.det)
    if synthesis is None and isinstance(alphabet, Synthesis):
        synthesis, alphabet = alphabet, alphabet.alphabet
    if synthesis is None and plan is not None:
        synthesis = Synthesis(M, plan=plan)
    if synthesis is not None and alphabet is None:
        alphabet = synthesis.alphabet
    if alphabet is None:
        raise ValueError("an alphabet or a synthesis is required")
    lift = lift_fractional(M, z)
    if isinstance(lift, NotRepresentable):
        raise NotRepresentableError(f"{z} is not in Fin(M) for any digit set", lift)
    zi = ScaledVector(lift.z, 0, M.det)
    if strategy == AUTO:
        if (synthesis is not None and synthesis.certified
                and (alphabet is synthesis.alphabet)):
            strategy = CONSTRUCTIVE
        else:
            strategy = SEARCH
    if strategy == CONSTRUCTIVE:
        if synthesis is None:
            raise ValueError("the constructive strategy needs a synthesis")
        rep, trace = constructive_encode(synthesis, zi, max_steps)
    elif strategy == SEARCH:
        if isinstance(alphabet, SumAlphabet):
            alphabet = alphabet.materialize()
        rep, trace = search_encode(M, zi, alphabet, window=window, max_terms=max_terms)
        if rep is None:
            raise EncodeBudgetExceeded(f"no representation of {zi} within the search budget")
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    trace.lift = lift.shift
    return shift(rep, -lift.shift), trace

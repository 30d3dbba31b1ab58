"""Digit-set synthesis per real Jordan block and the assembled alphabet.

Each block type gets its own digit set and a selection rule that keeps the
block coordinates of the perturbed dynamics x -> J x - d + eps bounded:

* unimodular complex blocks use the five-digit sets {0, +-3q e1, +-3q e2}
  per coordinate pair and an index function that only ever decreases,
* unimodular real blocks (lambda = +-1) use the one-dimensional analogue,
* contracting blocks need no digits at all,
* expanding blocks use an l_inf box of integers and plain rounding.

The block digit sets are stacked into one Jordan-coordinate digit set, moved
onto the lattice P Z^m and widened by every lattice point of norm <= C.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import CloseLatticeViolation, EnumerationCapExceeded
from .exactlinalg import IntMatrix, as_matrix
from .jordan import (CONTRACTING_BLOCK, EXPANDING_BLOCK, UNIMODULAR_COMPLEX, UNIMODULAR_REAL,
                     BlockDescriptor, JordanPlan, PerturbationBudget, block_matrix, build_plan,
                     nearest_preimage)

EPS_INF = 1 / 3
EPS_PAIR = 0.5

FRAME_JORDAN = "jordan"
FRAME_LATTICE = "lattice-preimage"
FRAME_M = "M"
FRAME_BLOCK = "block"


def _digit_key(d):
    return (any(d), d)


@dataclass(frozen=True)
class DigitSet:
    """A finite set of integer digit vectors with the zero digit at index 0.

    The remaining digits are kept in lexicographic order so that indices and
    serialisations are stable.
    """

    digits: tuple[tuple[int, ...], ...]
    frame: str = FRAME_M
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        ds = {tuple(int(v) for v in d) for d in self.digits}
        if not ds:
            raise ValueError("a digit set needs at least the zero digit")
        dims = {len(d) for d in ds}
        if len(dims) != 1:
            raise ValueError("digits of mixed dimension")
        dim = dims.pop()
        ds.add((0,) * dim)
        object.__setattr__(self, "digits", tuple(sorted(ds, key=_digit_key)))

    @property
    def dim(self) -> int:
        return len(self.digits[0])

    @property
    def zero_index(self) -> int:
        return 0

    @cached_property
    def _index(self) -> dict:
        return {d: i for i, d in enumerate(self.digits)}

    def index(self, d) -> int:
        return self._index[tuple(int(v) for v in d)]

    def __contains__(self, d) -> bool:
        return tuple(int(v) for v in d) in self._index

    def __len__(self) -> int:
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)

    def __getitem__(self, i):
        return self.digits[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.digits, dtype=np.int64).reshape(len(self.digits), self.dim)

    @property
    def alphabet_id(self) -> str:
        blob = json.dumps([list(d) for d in self.digits]).encode()
        return "set:" + hashlib.sha256(blob).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {"type": "digit-set", "frame": self.frame,
                "digits": [list(d) for d in self.digits], "meta": self.meta}

    @classmethod
    def from_dict(cls, d) -> "DigitSet":
        if isinstance(d, list):
            return cls(tuple(tuple(v) for v in d))
        return cls(tuple(tuple(v) for v in d["digits"]), d.get("frame", FRAME_M), d.get("meta", {}))

    @classmethod
    def product(cls, parts, frame=FRAME_JORDAN, meta=None) -> "DigitSet":
        digits = [sum(combo, ()) for combo in itertools.product(*[p.digits for p in parts])]
        return cls(tuple(digits), frame, meta or {})


# ---------------------------------------------------------------- pairs

def claim1_digits(q: int) -> DigitSet:
    """{0, (3q,0), (0,3q), (-3q,0), (0,-3q)}."""
    if q < 1:
        raise ValueError("q must be a positive integer")
    t = 3 * q
    return DigitSet(((0, 0), (t, 0), (0, t), (-t, 0), (0, -t)), FRAME_BLOCK, {"q": q})


def claim1_select(z, q: int) -> tuple[int, int]:
    """A digit b of claim1_digits(q) with ||z-b|| <= 6q or ||z-b|| <= ||z|| - q.

    The dominant coordinate decides: if its magnitude exceeds 3q, subtract the
    aligned digit, otherwise keep zero (so the boundary goes to zero).
    """
    z1, z2 = float(z[0]), float(z[1])
    t = 3 * q
    a1, a2 = abs(z1), abs(z2)
    if max(a1, a2) <= t:
        return (0, 0)
    cands = []
    if a1 >= a2:
        cands.append((int(math.copysign(t, z1)), 0))
    if a2 >= a1:
        cands.append((0, int(math.copysign(t, z2))))
    return min(cands)


def claim2_constants(c1: float) -> tuple[int, float, DigitSet]:
    """(q, c2, digits) with q the least integer >= c1 + 1 and c2 = 6q + 1/2."""
    if c1 < 0:
        raise ValueError("c1 must be non-negative")
    q = max(1, math.ceil(c1 + 1))
    return q, 6 * q + 0.5, claim1_digits(q)


def line_select(z: float, q: int) -> int:
    """One-dimensional analogue of claim1_select with digits {0, +-q}:
    |z-b| < q or |z-b| = |z| - q."""
    if abs(z) >= q:
        return q if z > 0 else -q
    return 0


def line_constants(c1: float) -> tuple[int, float]:
    """(q, c2) for the one-dimensional analogue: q = ceil(c1 + 1), c2 = q + 1/2."""
    if c1 < 0:
        raise ValueError("c1 must be non-negative")
    q = max(1, math.ceil(c1 + 1))
    return q, q + 0.5


# ---------------------------------------------------------------- block plans

@dataclass(frozen=True)
class BlockPlan:
    """Digits, constants and the selection rule for one real Jordan block."""

    block: BlockDescriptor
    constants: dict
    digits: DigitSet
    C: float

    @property
    def kind(self) -> str:
        return self.block.kind

    @cached_property
    def J(self) -> np.ndarray:
        return block_matrix(self.block)

    # -- unimodular index

    def pair_norms(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.block.complex_pair:
            return np.hypot(x[0::2], x[1::2])
        return np.abs(x)

    def index(self, x) -> int:
        """Largest (1-based) position whose pair norm reaches its K, else 0."""
        K = self.constants["K"]
        norms = self.pair_norms(x)
        for i in range(len(K), 0, -1):
            if norms[i - 1] >= K[i - 1]:
                return i
        return 0

    # -- contracting norm

    def c_norm(self, x) -> float:
        w = np.asarray(self.constants["weights"])
        return float(np.max(w * self.pair_norms(x)))

    def select(self, x) -> tuple[int, ...]:
        """Block digit (Jordan coordinates) for block coordinates ``x``."""
        x = np.asarray(x, dtype=float)
        kind = self.kind
        if kind == CONTRACTING_BLOCK:
            return (0,) * self.block.size
        Jx = self.J @ x
        if kind == EXPANDING_BLOCK:
            r = self.constants["radius"]
            return tuple(int(v) for v in np.clip(np.rint(Jx), -r, r))
        j = self.index(x)
        q = self.constants["q"]
        out = []
        if kind == UNIMODULAR_COMPLEX:
            for i in range(1, len(q) + 1):
                if i < j:
                    out += [0, 0]
                else:
                    out += list(claim1_select(Jx[2 * i - 2:2 * i], q[i - 1]))
        else:
            for i in range(1, len(q) + 1):
                out.append(0 if i < j else line_select(Jx[i - 1], q[i - 1]))
        return tuple(out)

    def to_dict(self) -> dict:
        return {"block": self.block.to_dict(), "constants": self.constants, "C": self.C,
                "digit_count": len(self.digits)}


def unit_complex_block_plan(block: BlockDescriptor) -> BlockPlan:
    """Constants K_1..K_l by the backward recursion K_l from c1 = 0,
    K_{i} from c1 = K_{i+1}; digit set is the stack of the per-pair sets."""
    ell = block.chain_length
    K = [0.0] * ell
    q = [0] * ell
    sets = [None] * ell
    c1 = 0.0
    for i in range(ell - 1, -1, -1):
        q[i], K[i], sets[i] = claim2_constants(c1)
        c1 = K[i]
    digits = DigitSet.product(sets, FRAME_BLOCK, {"q": q, "K": K})
    return BlockPlan(block, {"K": K, "q": q, "E_pair": EPS_PAIR}, digits, max(K))


def unit_real_block_digits(size: int, scaled: bool = False) -> DigitSet:
    """Digits for a Jordan block to lambda = +-1.

    With ``scaled=False`` these are the 3^m sign vectors. The synthesis uses
    ``scaled=True``: position i takes {0, +-q_i} with q_i from the
    one-dimensional recursion, which keeps the index argument valid under the
    rounding perturbation for blocks of size >= 2. Both agree for size 1.
    """
    if size < 1:
        raise ValueError("size must be positive")
    if not scaled:
        return DigitSet(tuple(itertools.product((-1, 0, 1), repeat=size)), FRAME_BLOCK)
    q, _ = _line_recursion(size)
    return DigitSet(tuple(itertools.product(*[(-qi, 0, qi) for qi in q])), FRAME_BLOCK, {"q": q})


def _line_recursion(size: int):
    K = [0.0] * size
    q = [0] * size
    c1 = 0.0
    for i in range(size - 1, -1, -1):
        q[i], K[i] = line_constants(c1)
        c1 = K[i]
    return q, K


def unit_real_block_plan(block: BlockDescriptor) -> BlockPlan:
    q, K = _line_recursion(block.size)
    digits = unit_real_block_digits(block.size, scaled=True)
    return BlockPlan(block, {"K": K, "q": q, "lambda": block.lam.real, "E_inf": EPS_INF},
                     digits, max(K))


def contract_block_plan(block: BlockDescriptor) -> BlockPlan:
    """Weighted norm ||x||_c = max_i w_i ||x_(i)|| with w_i = eta^-(i-1), where
    x_(i) is the i-th coordinate (or coordinate pair) and eta = beta - |lambda|.

    Then ||J x||_c <= (|lambda| + eta) ||x||_c = beta ||x||_c.
    """
    mod = abs(block.lam)
    beta = (1 + mod) / 2
    eta = beta - mod
    n = block.chain_length
    weights = [eta ** -(i) for i in range(n)]
    e_part = math.sqrt(2) / 3 if block.complex_pair else EPS_INF
    E = max(weights) * e_part
    gamma = (0.5 + E) / (1 - beta)
    # ||x||_c < gamma forces every part below gamma / w_i <= gamma
    C = gamma
    consts = {"beta": beta, "eta": eta, "weights": weights, "E": E, "gamma": gamma}
    return BlockPlan(block, consts, DigitSet(((0,) * block.size,), FRAME_BLOCK), C)


def expand_radius(block: BlockDescriptor, E: float = EPS_INF) -> int:
    J = block_matrix(block)
    rowsum = float(np.abs(J).sum(axis=1).max())
    bound = 2 * abs(block.lam) + 2 + E
    if rowsum > 2 * abs(block.lam) + 1:
        bound = max(bound, rowsum + 1 + E)
    return int(math.floor(bound + 1e-12))


def expand_block_digits(block: BlockDescriptor) -> DigitSet:
    """All integer vectors with ||d||_inf <= 2|lambda| + 2 + 1/3 (widened if the
    row sums of |J| are larger than 2|lambda| + 1)."""
    r = expand_radius(block)
    rng = range(-r, r + 1)
    return DigitSet(tuple(itertools.product(rng, repeat=block.size)), FRAME_BLOCK, {"radius": r})


def expand_block_plan(block: BlockDescriptor) -> BlockPlan:
    digits = expand_block_digits(block)
    return BlockPlan(block, {"radius": digits.meta["radius"], "E_inf": EPS_INF}, digits, 1.0)


def block_plan(block: BlockDescriptor) -> BlockPlan:
    return {EXPANDING_BLOCK: expand_block_plan, UNIMODULAR_COMPLEX: unit_complex_block_plan,
            UNIMODULAR_REAL: unit_real_block_plan,
            CONTRACTING_BLOCK: contract_block_plan}[block.kind](block)


def perturbation_budget(plans) -> PerturbationBudget:
    ec = [p.constants["E"] for p in plans if p.kind == CONTRACTING_BLOCK]
    return PerturbationBudget(E_c=max(ec) if ec else None)


# ---------------------------------------------------------------- assembly

def compose_alphabet(plans, plan: JordanPlan) -> tuple[DigitSet, float]:
    """Stack the block digit sets in block order; C is the largest block constant."""
    plans = sorted(plans, key=lambda p: p.block.start)
    if sum(p.block.size for p in plans) != plan.dim:
        raise ValueError("block plans do not cover the Jordan form")
    C = max(p.C for p in plans)
    meta = {"C": C}
    return DigitSet.product([p.digits for p in plans], FRAME_JORDAN, meta), C


def round_to_lattice(D_tilde: DigitSet, plan: JordanPlan) -> DigitSet:
    """Replace every Jordan-coordinate digit by an integer preimage c with
    ||P c - d||_inf < 1/3."""
    arr = D_tilde.as_array().astype(float)
    c, dev = nearest_preimage(plan.P, plan.Pinv, arr)
    if len(dev) and dev.max() >= EPS_INF:
        bad = int(np.argmax(dev))
        raise CloseLatticeViolation(
            f"no lattice point within 1/3 of {D_tilde.digits[bad]} (deviation {dev[bad]:.4f})")
    meta = dict(D_tilde.meta)
    meta["max_deviation"] = float(dev.max()) if len(dev) else 0.0
    return DigitSet(tuple(map(tuple, c.tolist())), FRAME_LATTICE, meta)


def ball_preimages(plan: JordanPlan, C: float, cap: int = 2_000_000) -> np.ndarray:
    """All integer c with ||P c||_inf <= C."""
    m = plan.dim
    bounds = np.floor(C * np.abs(plan.Pinv).sum(axis=1) + 1e-9).astype(int)
    total = int(np.prod(2 * bounds + 1, dtype=object))
    if total > cap:
        raise EnumerationCapExceeded(f"ball enumeration needs {total} candidates")
    axes = [np.arange(-b, b + 1) for b in bounds]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m)
    keep = np.abs(grid @ plan.P.T).max(axis=1) <= C + 1e-9
    return grid[keep]


@dataclass(frozen=True, eq=False)
class SumAlphabet:
    """The alphabet D + B with B = {c in Z^m : ||P c||_inf <= C}, kept implicit.

    For m = 3 the explicit set easily has millions of elements, so membership
    is decided as: a is a digit iff ||P (a - d)||_inf <= C for some d in D.
    """

    base: DigitSet
    P: np.ndarray
    C: float
    tol: float = 1e-9

    @property
    def dim(self) -> int:
        return self.base.dim

    @cached_property
    def _base_images(self) -> np.ndarray:
        return self.base.as_array() @ self.P.T

    def __contains__(self, a) -> bool:
        img = self.P @ np.asarray(a, dtype=float)
        dev = np.abs(img[None, :] - self._base_images).max(axis=1)
        return bool(dev.min() <= self.C + self.tol)

    @property
    def alphabet_id(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return "sum:" + hashlib.sha256(blob).hexdigest()[:16]

    def ball(self, cap: int = 2_000_000) -> np.ndarray:
        m = self.dim
        bounds = np.floor(self.C * np.abs(np.linalg.inv(self.P)).sum(axis=1) + 1e-9).astype(int)
        total = int(np.prod(2 * bounds + 1, dtype=object))
        if total > cap:
            raise EnumerationCapExceeded(f"ball enumeration needs {total} candidates")
        axes = [np.arange(-b, b + 1) for b in bounds]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m)
        return grid[np.abs(grid @ self.P.T).max(axis=1) <= self.C + 1e-9]

    def materialize(self, cap: int = 200_000) -> DigitSet:
        """Explicit D + B; raises EnumerationCapExceeded when too large."""
        B = self.ball()
        D = self.base.as_array()
        if len(B) * len(D) > cap:
            raise EnumerationCapExceeded(f"alphabet would have up to {len(B) * len(D)} digits")
        sums = (D[:, None, :] + B[None, :, :]).reshape(-1, self.dim)
        return DigitSet(tuple(map(tuple, np.unique(sums, axis=0).tolist())), FRAME_M,
                        {"C": self.C})

    def to_dict(self) -> dict:
        return {"type": "sum", "base": [list(d) for d in self.base.digits],
                "P": self.P.tolist(), "C": self.C}

    @classmethod
    def from_dict(cls, d) -> "SumAlphabet":
        return cls(DigitSet(tuple(tuple(v) for v in d["base"]), FRAME_LATTICE),
                   np.array(d["P"]), d["C"])


def final_alphabet(D: DigitSet, C: float, plan: JordanPlan) -> SumAlphabet:
    """The alphabet D + {c : ||P c||_inf <= C} in preimage (M) coordinates."""
    return SumAlphabet(D, plan.P, C)


# ---------------------------------------------------------------- bundle

class Synthesis:
    """Everything the constructive encoder needs for one matrix."""

    def __init__(self, M, plan: JordanPlan | None = None, seed: int = 0):
        self.matrix: IntMatrix = as_matrix(M)
        self.seed = seed
        self.plan = plan if plan is not None else build_plan(self.matrix, seed=seed)
        self.block_plans = tuple(block_plan(b) for b in self.plan.blocks)
        self.C = max(p.C for p in self.block_plans)
        self._lattice_cache: dict = {}

    @property
    def certified(self) -> bool:
        return self.plan.closeness

    def select(self, x) -> np.ndarray:
        """Stacked Jordan-coordinate digit for Jordan coordinates ``x``."""
        out = np.zeros(self.plan.dim, dtype=np.int64)
        for bp in self.block_plans:
            out[bp.block.slice] = bp.select(x[bp.block.slice])
        return out

    def lattice_digit(self, d) -> tuple[int, ...]:
        """Integer preimage for a single Jordan-coordinate digit (memoised)."""
        key = tuple(int(v) for v in d)
        c = self._lattice_cache.get(key)
        if c is None:
            cs, dev = nearest_preimage(self.plan.P, self.plan.Pinv, np.array([key], dtype=float))
            if dev[0] >= EPS_INF:
                raise CloseLatticeViolation(f"no lattice point within 1/3 of {key}")
            c = tuple(int(v) for v in cs[0])
            self._lattice_cache[key] = c
        return c

    @cached_property
    def jordan_digits(self) -> DigitSet:
        return compose_alphabet(self.block_plans, self.plan)[0]

    @cached_property
    def lattice_digits(self) -> DigitSet:
        return round_to_lattice(self.jordan_digits, self.plan)

    @cached_property
    def alphabet(self) -> SumAlphabet:
        return final_alphabet(self.lattice_digits, self.C, self.plan)

    @property
    def budget(self) -> PerturbationBudget:
        return perturbation_budget(self.block_plans)

    def to_dict(self) -> dict:
        return {
            "format": "matnum.alphabet",
            "version": 1,
            "matrix": self.matrix.tolist(),
            "seed": self.seed,
            "alpha": self.plan.alpha,
            "C": self.C,
            "certified": self.certified,
            "blocks": [p.to_dict() for p in self.block_plans],
            "jordan_digit_count": len(self.jordan_digits),
            "alphabet": self.alphabet.to_dict(),
        }


def synthesize_alphabet(M, seed: int = 0) -> Synthesis:
    return Synthesis(M, seed=seed)

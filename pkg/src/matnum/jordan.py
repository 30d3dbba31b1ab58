"""Real Jordan form J = P M P^{-1} with an integer-friendly choice of P.

Jordan chain *lengths* are decided exactly: for an irreducible factor f of
the characteristic polynomial, dim ker f(M)^j over Q determines how many
chains of each length every root of f carries. Chain *vectors* are exact
integers for rational eigenvalues and come from SVD null spaces otherwise.

Jordan coordinates of a vector z are x = P z. Columns of P^{-1} are the real
and imaginary parts of the chain vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .errors import JordanUnstable, SingularMatrix
from .exactlinalg import (IntMatrix, IntPolynomial, as_matrix, char_poly, matmul,
                          matvec, nullspace, primitive, rank, mat_pow)
from .spectrum import CONTRACTING, EXPANDING, UNIMODULAR, SpectralSplit, classify

EXPANDING_BLOCK = "expanding"
UNIMODULAR_COMPLEX = "unimodular_complex"
UNIMODULAR_REAL = "unimodular_real"
CONTRACTING_BLOCK = "contracting"

_KIND_ORDER = {EXPANDING_BLOCK: 0, UNIMODULAR_COMPLEX: 1, UNIMODULAR_REAL: 1, CONTRACTING_BLOCK: 2}
_PART = {"e": (EXPANDING_BLOCK,), "u": (UNIMODULAR_COMPLEX, UNIMODULAR_REAL),
         "c": (CONTRACTING_BLOCK,)}

PLAN_FORMAT = "matnum.jordan-plan"
PLAN_VERSION = 1


@dataclass(frozen=True)
class BlockDescriptor:
    kind: str
    size: int
    lam: complex
    start: int
    complex_pair: bool = False

    @property
    def coordinate_range(self) -> range:
        return range(self.start, self.start + self.size)

    @property
    def chain_length(self) -> int:
        return self.size // 2 if self.complex_pair else self.size

    @property
    def slice(self) -> slice:
        return slice(self.start, self.start + self.size)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "size": self.size, "lambda": [self.lam.real, self.lam.imag],
                "start": self.start, "complex_pair": self.complex_pair}

    @classmethod
    def from_dict(cls, d: dict) -> "BlockDescriptor":
        return cls(d["kind"], d["size"], complex(*d["lambda"]), d["start"], d["complex_pair"])


@dataclass(frozen=True)
class PerturbationBudget:
    """Bounds on the lattice-rounding perturbation eps, one per norm in use."""

    eps_bound: float = 1 / 3
    E_inf: float = 1 / 3
    E_2: float = 0.5
    E_c: float | None = None


def block_matrix(block: BlockDescriptor) -> np.ndarray:
    """The real Jordan block: lambda or R = [[a, b], [-b, a]] on the diagonal,
    identity on the superdiagonal."""
    n = block.size
    J = np.zeros((n, n))
    if block.complex_pair:
        a, b = block.lam.real, block.lam.imag
        R = np.array([[a, b], [-b, a]])
        for i in range(block.chain_length):
            J[2 * i:2 * i + 2, 2 * i:2 * i + 2] = R
            if i + 1 < block.chain_length:
                J[2 * i:2 * i + 2, 2 * i + 2:2 * i + 4] = np.eye(2)
    else:
        for i in range(n):
            J[i, i] = block.lam.real
            if i + 1 < n:
                J[i, i + 1] = 1.0
    return J


@dataclass(frozen=True, eq=False)
class JordanPlan:
    matrix: IntMatrix
    blocks: tuple[BlockDescriptor, ...]
    J: np.ndarray
    P: np.ndarray
    Pinv: np.ndarray
    residual: float
    alpha: float = 1.0
    exact_basis: bool = False
    closeness: bool = False
    closeness_bound: float = math.inf
    max_deviation: float = math.nan

    @property
    def dim(self) -> int:
        return self.matrix.dim

    @property
    def Jinv(self) -> np.ndarray:
        return np.linalg.inv(self.J)

    def coords(self, z) -> np.ndarray:
        """Jordan coordinates P z."""
        return self.P @ np.asarray(z, dtype=float)

    def mask(self, part: str) -> np.ndarray:
        kinds = _PART[part]
        m = np.zeros(self.dim, dtype=bool)
        for b in self.blocks:
            if b.kind in kinds:
                m[b.slice] = True
        return m

    def to_dict(self) -> dict:
        return {
            "format": PLAN_FORMAT,
            "version": PLAN_VERSION,
            "matrix": self.matrix.tolist(),
            "blocks": [b.to_dict() for b in self.blocks],
            "J": self.J.tolist(),
            "P": self.P.tolist(),
            "Pinv": self.Pinv.tolist(),
            "alpha": self.alpha,
            "residual": self.residual,
            "exact_basis": self.exact_basis,
            "closeness": {"certified": self.closeness, "rounding_bound": self.closeness_bound,
                          "sampled_max_deviation": self.max_deviation},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "JordanPlan":
        if d.get("format") != PLAN_FORMAT or d.get("version") != PLAN_VERSION:
            raise ValueError("unsupported plan format")
        c = d["closeness"]
        return cls(IntMatrix(d["matrix"]), tuple(BlockDescriptor.from_dict(b) for b in d["blocks"]),
                   np.array(d["J"]), np.array(d["P"]), np.array(d["Pinv"]), d["residual"],
                   d["alpha"], d["exact_basis"], c["certified"], c["rounding_bound"],
                   c["sampled_max_deviation"])


def jordan_partition(M: IntMatrix, factor: tuple[int, ...], multiplicity: int) -> dict[int, int]:
    """Number of Jordan chains of each length for any single root of ``factor``.

    Uses exact ranks: dim ker f(M)^j = deg f * sum_chains min(len, j).
    """
    M = as_matrix(M)
    m = M.dim
    f = IntPolynomial(factor)
    F = f.at_matrix(M)
    deg = f.degree
    d = [0]
    Fj = IntMatrix.identity(m)
    for _ in range(multiplicity):
        Fj = matmul(Fj, F)
        nullity = m - rank(Fj)
        assert nullity % deg == 0
        d.append(nullity // deg)
        if d[-1] == multiplicity:
            break
    if d[-1] != multiplicity:
        raise JordanUnstable("generalised eigenspace dimension disagrees with multiplicity")
    at_least = [d[j] - d[j - 1] for j in range(1, len(d))] + [0]
    return {j + 1: at_least[j] - at_least[j + 1] for j in range(len(d) - 1)
            if at_least[j] - at_least[j + 1] > 0}


def _exact_chains(M: IntMatrix, lam: int, partition: dict[int, int]):
    m = M.dim
    N = IntMatrix([[M.rows[i][j] - (lam if i == j else 0) for j in range(m)] for i in range(m)])
    smax = max(partition)
    kernels = {0: []}
    for j in range(1, smax + 1):
        kernels[j] = [primitive(v) for v in nullspace(mat_pow(N, j).rows, m)]
    tops = []
    for j in range(smax, 0, -1):
        need = partition.get(j, 0)
        if not need:
            continue
        span = list(kernels[j - 1])
        for L, top in tops:
            v = top
            for _ in range(L - j):
                v = matvec(N, v)
            span.append(v)
        r = rank(span) if span else 0
        for v in kernels[j]:
            if need == 0:
                break
            if rank(span + [v]) > r:
                span.append(v)
                r += 1
                tops.append((j, v))
                need -= 1
    chains = []
    for L, top in tops:
        vecs = [top]
        for _ in range(L - 1):
            vecs.append(matvec(N, vecs[-1]))
        chains.append((L, list(reversed(vecs))))
    return chains


def _orth(A: np.ndarray, tol=1e-10) -> np.ndarray:
    if A.shape[1] == 0:
        return A
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    r = int(np.sum(s > tol * max(1.0, s[0])))
    return U[:, :r]


def _numeric_chains(Mf: np.ndarray, lam: complex, partition: dict[int, int], real: bool):
    m = Mf.shape[0]
    dtype = float if real else complex
    N = Mf.astype(dtype) - (lam.real if real else lam) * np.eye(m, dtype=dtype)
    smax = max(partition)
    dims = {0: 0}
    for j in range(1, smax + 1):
        dims[j] = dims[j - 1] + sum(c for L, c in partition.items() if L >= j)
    kernels = {0: np.zeros((m, 0), dtype=dtype)}
    Nj = np.eye(m, dtype=dtype)
    for j in range(1, smax + 1):
        Nj = Nj @ N
        _, _, Vh = np.linalg.svd(Nj)
        kernels[j] = Vh[m - dims[j]:].conj().T
    tops = []
    for j in range(smax, 0, -1):
        need = partition.get(j, 0)
        if not need:
            continue
        cols = [kernels[j - 1]]
        for L, top in tops:
            cols.append((np.linalg.matrix_power(N, L - j) @ top)[:, None])
        S = _orth(np.hstack(cols))
        K = kernels[j]
        R = K - S @ (S.conj().T @ K)
        U, _, _ = np.linalg.svd(R, full_matrices=False)
        for i in range(need):
            tops.append((j, U[:, i]))
    chains = []
    for L, top in tops:
        if not real:
            k = int(np.argmax(np.abs(top)))
            top = top * (abs(top[k]) / top[k])
        vecs = [top]
        for _ in range(L - 1):
            vecs.append(N @ vecs[-1])
        chains.append((L, list(reversed(vecs))))
    return chains


def _block_kind(root) -> str:
    if root.kind == EXPANDING:
        return EXPANDING_BLOCK
    if root.kind == CONTRACTING:
        return CONTRACTING_BLOCK
    return UNIMODULAR_REAL if root.is_real else UNIMODULAR_COMPLEX


def real_jordan(M, split: SpectralSplit | None = None, tol: float = 1e-9) -> JordanPlan:
    """Real Jordan decomposition with blocks ordered expanding, unimodular,
    contracting. Raises JordanUnstable when the residual exceeds ``tol``."""
    M = as_matrix(M)
    if M.det == 0:
        raise SingularMatrix("matrix is singular")
    if split is None:
        split = classify(char_poly(M))
    m = M.dim
    Mf = np.array(M.rows, dtype=float)
    mult = dict(split.factors)
    pieces = []
    for root in split.roots:
        if not root.is_real and root.value.imag < 0:
            continue
        partition = jordan_partition(M, root.factor, mult[root.factor])
        kind = _block_kind(root)
        exact = len(root.factor) == 2
        if exact:
            lam = -root.factor[1]
            chains = _exact_chains(M, lam, partition)
            value = complex(lam, 0)
        else:
            chains = _numeric_chains(Mf, root.value, partition, root.is_real)
            value = root.value
        for L, vecs in chains:
            if root.is_real:
                cols = [np.array(v, dtype=float) for v in vecs]
                int_cols = [tuple(v) for v in vecs] if exact else None
                size, cpair = L, False
            else:
                cols = []
                for v in vecs:
                    cols += [v.real.copy(), v.imag.copy()]
                int_cols = None
                size, cpair = 2 * L, True
            key = (_KIND_ORDER[kind], -abs(value), -value.real, -abs(value.imag), -size)
            pieces.append((key, kind, size, value, cpair, cols, int_cols))
    pieces.sort(key=lambda p: p[0])
    blocks = []
    Q = np.zeros((m, m))
    int_Q = [[0] * m for _ in range(m)]
    all_exact = True
    start = 0
    for _, kind, size, value, cpair, cols, int_cols in pieces:
        blocks.append(BlockDescriptor(kind, size, value, start, cpair))
        for i, c in enumerate(cols):
            Q[:, start + i] = c
        if int_cols is None:
            all_exact = False
        else:
            for i, c in enumerate(int_cols):
                for r in range(m):
                    int_Q[r][start + i] = c[r]
        start += size
    if start != m:
        raise JordanUnstable(f"assembled {start} coordinates, expected {m}")
    J = np.zeros((m, m))
    for b in blocks:
        J[b.slice, b.slice] = block_matrix(b)
    if all_exact:
        from .exactlinalg import adjugate

        Qi = IntMatrix(int_Q)
        dq = Qi.det
        adj = adjugate(Qi)
        P = np.array([[float(Fraction(v, dq)) for v in row] for row in adj.rows])
    else:
        if abs(np.linalg.det(Q)) < 1e-12:
            raise JordanUnstable("numerical Jordan basis is singular")
        P = np.linalg.inv(Q)
    residual = float(np.abs(P @ Mf @ Q - J).sum(axis=1).max())
    if not residual <= tol:
        raise JordanUnstable(f"residual {residual:.3e} exceeds tolerance {tol:.1e}")
    return JordanPlan(M, tuple(blocks), J, P, Q, residual, 1.0, all_exact)


def norm_inf(A: np.ndarray) -> float:
    """Induced infinity norm (max absolute row sum)."""
    return float(np.abs(A).sum(axis=1).max())


def nearest_preimage(P: np.ndarray, Pinv: np.ndarray, targets: np.ndarray):
    """For each row t of ``targets`` find integer c minimising ||P c - t||_inf
    among round(P^{-1} t) and its {-1,0,1}^m neighbours.

    Returns (c, deviation) arrays.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    base = np.rint(targets @ Pinv.T).astype(np.int64)
    m = P.shape[0]
    best_c = base.copy()
    best_d = np.abs(base @ P.T - targets).max(axis=1)
    if m <= 6:
        offs = np.array(np.meshgrid(*[[-1, 0, 1]] * m, indexing="ij")).reshape(m, -1).T
        for off in offs:
            if not off.any():
                continue
            c = base + off
            d = np.abs(c @ P.T - targets).max(axis=1)
            better = d < best_d - 1e-15
            best_c[better] = c[better]
            best_d[better] = d[better]
    return best_c, best_d


def scale_lattice(plan: JordanPlan, samples: int = 1000, seed: int = 0,
                  radius: int = 100) -> JordanPlan:
    """Rescale P by alpha > 0 so that the lattice alpha P Z^m is close to Z^m.

    When P is an integer matrix of determinant +-1 the lattice already equals
    Z^m and alpha stays 1. Otherwise alpha is chosen so the rounding bound
    alpha ||P||_inf / 2 stays below 1/3; the bound is then backed by sampling
    integer targets.
    """
    P = plan.P
    m = plan.dim
    Pr = np.rint(P)
    if np.allclose(P, Pr, atol=1e-12, rtol=0) and round(abs(np.linalg.det(Pr))) == 1:
        alpha = 1.0
        P_scaled = Pr
        bound = 0.0
    else:
        alpha = min(1.0, 0.97 * (2.0 / 3.0) / norm_inf(P))
        P_scaled = alpha * P
        bound = 0.5 * norm_inf(P_scaled)
    Pinv_scaled = plan.Pinv / alpha
    rng = np.random.default_rng(seed)
    targets = rng.integers(-radius, radius + 1, size=(samples, m))
    _, dev = nearest_preimage(P_scaled, Pinv_scaled, targets)
    max_dev = float(dev.max()) if samples else 0.0
    ok = bound < 1 / 3 and max_dev < 1 / 3
    return replace(plan, P=P_scaled, Pinv=Pinv_scaled, alpha=plan.alpha * alpha,
                   closeness=ok, closeness_bound=bound, max_deviation=max_dev)


def project(plan: JordanPlan, x, part: str) -> np.ndarray:
    """Keep only the Jordan coordinates of the expanding ('e'), unimodular
    ('u') or contracting ('c') blocks."""
    x = np.asarray(x, dtype=float)
    return np.where(plan.mask(part), x, 0.0)


def build_plan(M, tol: float = 1e-9, seed: int = 0, samples: int = 1000) -> JordanPlan:
    M = as_matrix(M)
    split = classify(char_poly(M))
    return scale_lattice(real_jordan(M, split, tol), samples=samples, seed=seed)

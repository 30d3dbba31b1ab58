import itertools
import json
import random
from collections import Counter

import numpy as np
import pytest
import sympy

from cases import ROT, SHEAR, TRIB, TWO, random_nonsingular
from matnum.errors import JordanUnstable, SingularMatrix
from matnum.jordan import (CONTRACTING_BLOCK, EXPANDING_BLOCK, UNIMODULAR_COMPLEX,
                           UNIMODULAR_REAL, JordanPlan, build_plan, nearest_preimage, norm_inf,
                           project, real_jordan, scale_lattice)


def brute_deviation(P, t, reach=2):
    """min ||P c - t||_inf over a wide box around the rounded preimage."""
    base = np.rint(np.linalg.solve(P, t))
    best = np.inf
    for off in itertools.product(range(-reach, reach + 1), repeat=len(t)):
        best = min(best, np.abs(P @ (base + off) - t).max())
    return best


def sympy_chains(M):
    """Multiset of (kind, chain length, is_real) computed with sympy, with
    conjugate pairs counted once.

    For each irreducible factor f of multiplicity k, the number of chains of
    length >= j is (rank f(M)^(j-1) - rank f(M)^j) / deg f.
    """
    x = sympy.Symbol("x")
    A = sympy.Matrix(M)
    n = A.shape[0]
    out = Counter()
    _, factors = sympy.factor_list(A.charpoly(x).as_expr())
    for f, k in factors:
        f = sympy.Poly(f, x)
        deg = f.degree()
        fA = sympy.zeros(n)
        for c in f.all_coeffs():
            fA = fA * A + c * sympy.eye(n)
        ranks = [n]
        power = sympy.eye(n)
        for _ in range(k):
            power = power * fA
            ranks.append(power.rank())
        at_least = [(ranks[j - 1] - ranks[j]) // deg for j in range(1, k + 1)] + [0]
        roots = [complex(r) for r in f.nroots()]
        for j in range(1, k + 1):
            count = at_least[j - 1] - at_least[j]
            if not count:
                continue
            for lam in roots:
                if lam.imag < -1e-12:
                    continue
                r = abs(lam)
                kind = "e" if r > 1 + 1e-9 else "c" if r < 1 - 1e-9 else "u"
                out[(kind, j, abs(lam.imag) <= 1e-12)] += count
    return out


def plan_chains(plan):
    kinds = {EXPANDING_BLOCK: "e", UNIMODULAR_COMPLEX: "u", UNIMODULAR_REAL: "u",
             CONTRACTING_BLOCK: "c"}
    return Counter((kinds[b.kind], b.chain_length, not b.complex_pair) for b in plan.blocks)


def test_rotation_plan():
    plan = build_plan(ROT)
    assert [b.kind for b in plan.blocks] == [UNIMODULAR_COMPLEX]
    assert abs(plan.blocks[0].lam) == pytest.approx(1)
    assert abs(np.angle(plan.blocks[0].lam)) == pytest.approx(np.pi / 2)
    assert plan.residual < 1e-12
    assert plan.closeness


def test_scaled_identity_plan():
    plan = build_plan(TWO)
    assert [(b.kind, b.size) for b in plan.blocks] == [(EXPANDING_BLOCK, 1)] * 2
    assert plan.residual == 0
    assert plan.alpha == 1.0
    assert plan.max_deviation == 0


def test_tribonacci_plan():
    plan = build_plan(TRIB)
    (e, c) = plan.blocks
    assert (e.kind, e.size) == (EXPANDING_BLOCK, 1)
    assert e.lam.real == pytest.approx(-1.8392867552, abs=1e-9)
    assert (c.kind, c.size, c.complex_pair) == (CONTRACTING_BLOCK, 2, True)
    assert plan.residual < 1e-12


def test_defective_unit_block():
    plan = build_plan(SHEAR)
    (b,) = plan.blocks
    assert (b.kind, b.size) == (UNIMODULAR_REAL, 2)
    assert plan.exact_basis and plan.residual == 0
    assert np.array_equal(plan.J, [[1, 1], [0, 1]])


def test_block_order():
    plan = build_plan([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 3, 1], [0, 0, 1, 0]])
    kinds = [b.kind for b in plan.blocks]
    order = {EXPANDING_BLOCK: 0, UNIMODULAR_COMPLEX: 1, UNIMODULAR_REAL: 1, CONTRACTING_BLOCK: 2}
    assert kinds == sorted(kinds, key=order.get)
    assert sum(b.size for b in plan.blocks) == 4
    starts = [b.start for b in plan.blocks]
    assert starts == sorted(starts) and starts[0] == 0


def test_project_examples():
    rot = build_plan(ROT)
    assert np.allclose(project(rot, [3, 4], "u"), [3, 4])
    two = build_plan(TWO)
    assert np.allclose(project(two, [3, 4], "c"), [0, 0])
    tri = build_plan(TRIB)
    x = tri.coords([1, 1, 1])
    xe = project(tri, x, "e")
    assert xe[0] == x[0] and not xe[1:].any()


def test_singular_rejected():
    with pytest.raises(SingularMatrix):
        real_jordan([[1, 2], [2, 4]])


def test_unstable_when_tolerance_unreachable():
    with pytest.raises(JordanUnstable):
        real_jordan(TRIB, tol=1e-30)


def test_scale_lattice_shrinks_large_basis():
    base = build_plan(TWO)
    big = JordanPlan(base.matrix, base.blocks, base.J, 10 * np.eye(2), np.eye(2) / 10, 0.0)
    plan = scale_lattice(big)
    assert plan.closeness
    assert 0.5 * norm_inf(plan.P) < 1 / 3
    assert plan.max_deviation < 1 / 3
    rng = np.random.default_rng(1)
    for t in rng.integers(-100, 101, size=(50, 2)):
        assert brute_deviation(plan.P, t.astype(float)) < 1 / 3


def test_scale_lattice_keeps_unimodular_integer_basis():
    base = build_plan(TWO)
    P = np.array([[1.0, 1.0], [0.0, 1.0]])
    plan = scale_lattice(JordanPlan(base.matrix, base.blocks, base.J, P, np.linalg.inv(P), 0.0))
    assert plan.alpha == 1.0 and plan.max_deviation == 0 and plan.closeness


def test_scale_lattice_random_basis():
    rng = np.random.default_rng(7)
    base = build_plan([[2, 0, 0], [0, 2, 0], [0, 0, 2]])
    P = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    plan = scale_lattice(JordanPlan(base.matrix, base.blocks, base.J, P, np.linalg.inv(P), 0.0))
    assert plan.closeness and plan.max_deviation < 1 / 3


def test_plan_roundtrip():
    plan = build_plan(TRIB)
    again = JordanPlan.from_dict(json.loads(json.dumps(plan.to_dict())))
    assert np.array_equal(again.P, plan.P) and again.blocks == plan.blocks
    assert again.alpha == plan.alpha and again.closeness == plan.closeness


def corpus(n=60, seed=2):
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        m = rng.randint(1, 3)
        out.append(random_nonsingular(rng, m))
    return out + [SHEAR, [[1, 1, 0], [0, 1, 1], [0, 0, 1]], [[-1, 1], [0, -1]],
                  [[2, 1, 0], [0, 2, 1], [0, 0, 2]], [[0, -1, 1, 0], [1, 0, 0, 1], [0, 0, 0, -1],
                                                      [0, 0, 1, 0]]]


@pytest.mark.parametrize("M", corpus())
def test_plan_invariants(M):
    try:
        plan = build_plan(M)
    except JordanUnstable:
        pytest.skip("numerically ambiguous Jordan structure")
    m = len(M)
    Mf = np.array(M, dtype=float)
    # residual of the stored transform
    assert plan.residual <= 1e-9
    assert np.abs(plan.P @ Mf @ plan.Pinv - plan.J).max() <= 1e-9 * max(1, norm_inf(Mf))
    # chain structure agrees with the rank counts from sympy
    assert plan_chains(plan) == sympy_chains(M)
    # projections add up
    rng = np.random.default_rng(0)
    for x in rng.normal(size=(20, m)):
        total = project(plan, x, "e") + project(plan, x, "u") + project(plan, x, "c")
        assert np.abs(total - x).max() < 1e-12
    # J maps the lattice into itself
    for c in rng.integers(-20, 21, size=(20, m)):
        assert np.abs(plan.J @ (plan.P @ c) - plan.P @ (Mf @ c)).max() < 1e-10
    # closeness, checked against a wider neighbour search
    assert plan.closeness
    targets = rng.integers(-100, 101, size=(1000, m)).astype(float)
    _, dev = nearest_preimage(plan.P, plan.Pinv, targets)
    assert dev.max() < 1 / 3
    for t in targets[:30]:
        assert brute_deviation(plan.P, t) <= dev.max() + 1e-12

"""Certified classification of eigenvalues against the unit circle.

Two stages. An exact gcd with the reciprocal polynomial isolates the factor
that can carry roots of modulus one; everything else is settled by refining
isolating boxes until each box lies strictly inside or outside the circle.
Roots of the reciprocal factor are certified unimodular when the box image of
``z -> 1/conj(z)`` meets no other root's box.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from .errors import ClassificationBudgetExceeded
from .exactlinalg import IntPolynomial

EXPANDING = "expanding"
UNIMODULAR = "unimodular"
CONTRACTING = "contracting"

_X = sympy.Symbol("x")


def _to_sympy(p: IntPolynomial) -> sympy.Poly:
    return sympy.Poly(list(p.coeffs), _X, domain="ZZ")


def _from_sympy(f: sympy.Poly) -> IntPolynomial:
    coeffs = [int(c) for c in f.all_coeffs()]
    if coeffs[0] < 0:
        coeffs = [-c for c in coeffs]
    return IntPolynomial(tuple(coeffs))


def reciprocal(p: IntPolynomial) -> IntPolynomial:
    """x^deg p(1/x), without normalising the leading coefficient."""
    return IntPolynomial(tuple(reversed(p.coeffs)))


def unimodular_factor(p: IntPolynomial) -> IntPolynomial:
    """gcd(p, x^deg p(1/x)) in primitive integer form with positive lead.

    Every root of ``p`` on the unit circle is a root of the result.
    """
    if p(0) == 0:
        raise ValueError("p(0) must be non-zero")
    f = _to_sympy(p)
    g = sympy.gcd(f, _to_sympy(reciprocal(p)))
    g = sympy.Poly(g, _X, domain="ZZ")
    _, g = g.primitive()
    return _from_sympy(g)


@dataclass(frozen=True)
class Eigenvalue:
    value: complex
    multiplicity: int
    kind: str
    factor: tuple[int, ...]
    is_real: bool

    @property
    def modulus(self) -> float:
        return abs(self.value)

    @property
    def angle(self) -> float:
        return cmath.phase(self.value)


@dataclass(frozen=True)
class SpectralSplit:
    """Roots of a characteristic polynomial sorted into three classes.

    ``roots`` lists every distinct root (complex roots with both conjugates)
    with its algebraic multiplicity.
    """

    roots: tuple[Eigenvalue, ...]
    factors: tuple[tuple[tuple[int, ...], int], ...] = field(default=())

    def _of(self, kind):
        return [r for r in self.roots if r.kind == kind]

    @property
    def expanding(self):
        return [(r.value, r.multiplicity) for r in self._of(EXPANDING)]

    @property
    def unimodular(self):
        return [(r.value, r.multiplicity, r.is_real, r.angle) for r in self._of(UNIMODULAR)]

    @property
    def contracting(self):
        return [(r.value, r.multiplicity) for r in self._of(CONTRACTING)]

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(sum(r.multiplicity for r in self._of(k))
                     for k in (EXPANDING, UNIMODULAR, CONTRACTING))

    def to_dict(self) -> dict:
        def enc(z):
            return [z.real, z.imag]

        return {
            "dims": list(self.dims),
            "roots": [{"value": enc(r.value), "multiplicity": r.multiplicity,
                       "kind": r.kind, "is_real": r.is_real,
                       "factor": list(r.factor)} for r in self.roots],
        }


def _sq_range(lo: Fraction, hi: Fraction):
    """Range of t^2 for t in [lo, hi]."""
    a, b = lo * lo, hi * hi
    if lo <= 0 <= hi:
        return Fraction(0), max(a, b)
    return min(a, b), max(a, b)


def _frac(r) -> Fraction:
    r = sympy.Rational(r)
    return Fraction(int(r.p), int(r.q))


def _boxes(f: sympy.Poly, eps: Fraction):
    real, cplx = f.intervals(all=True, eps=sympy.Rational(eps.numerator, eps.denominator))
    out = []
    for (a, b), _ in real:
        a, b = _frac(a), _frac(b)
        out.append((a, b, Fraction(0), Fraction(0)))
    for (sw, ne), _ in cplx:
        out.append((_frac(sympy.re(sw)), _frac(sympy.re(ne)),
                    _frac(sympy.im(sw)), _frac(sympy.im(ne))))
    return out


def _classify_box(box, all_boxes, reciprocal_factor: bool):
    x1, x2, y1, y2 = box
    xr = _sq_range(x1, x2)
    yr = _sq_range(y1, y2)
    lo, hi = xr[0] + yr[0], xr[1] + yr[1]
    if lo > 1:
        return EXPANDING
    if hi < 1:
        return CONTRACTING
    if not reciprocal_factor or lo == 0:
        return None
    # image of the box under z -> z / |z|^2
    cands_x = [x / r for x in (x1, x2) for r in (lo, hi)]
    cands_y = [y / r for y in (y1, y2) for r in (lo, hi)]
    ix = (min(cands_x), max(cands_x))
    iy = (min(cands_y), max(cands_y))
    for other in all_boxes:
        if other is box:
            continue
        ox1, ox2, oy1, oy2 = other
        if ix[0] <= ox2 and ox1 <= ix[1] and iy[0] <= oy2 and oy1 <= iy[1]:
            return None
    return UNIMODULAR


def _classify_factor(f: sympy.Poly, reciprocal_factor: bool, budget_bits: int):
    deg = f.degree()
    if deg == 1:
        a, b = (int(c) for c in f.all_coeffs())
        root = Fraction(-b, a)
        kind = EXPANDING if abs(root) > 1 else UNIMODULAR if abs(root) == 1 else CONTRACTING
        return [(complex(float(root), 0.0), kind, True)]
    bits = min(8, budget_bits)
    while True:
        eps = Fraction(1, 2 ** bits)
        boxes = _boxes(f, eps)
        kinds = []
        for box in boxes:
            if box[2] == box[3] == 0:
                # real irrational roots can never have modulus exactly one
                a, b = box[0], box[1]
                if a > 1 or b < -1:
                    kinds.append(EXPANDING)
                elif a > -1 and b < 1:
                    kinds.append(CONTRACTING)
                else:
                    kinds.append(None)
            else:
                kinds.append(_classify_box(box, boxes, reciprocal_factor))
        if None not in kinds:
            break
        if bits >= budget_bits:
            if None in kinds:
                raise ClassificationBudgetExceeded(
                    f"could not separate a root of {f.as_expr()} from |z|=1 "
                    f"within {budget_bits} bits")
            break
        bits = min(2 * bits, budget_bits)
    # the boxes certify the classes; the values come from numpy, whose roots
    # of an irreducible (hence square-free) factor are accurate to ~1e-15
    approx = list(np.roots([float(c) for c in f.all_coeffs()]))
    out = []
    for box, kind in zip(boxes, kinds):
        x1, x2, y1, y2 = box
        is_real = y1 == y2 == 0
        centre = complex(float((x1 + x2) / 2), float((y1 + y2) / 2))
        z = min(approx, key=lambda w: abs(w - centre))
        approx.remove(z)
        z = complex(z.real, 0.0) if is_real else complex(z)
        if kind == UNIMODULAR and not is_real:
            z = z / abs(z)
        out.append((z, kind, is_real))
    return out


def classify(p: IntPolynomial, budget_bits: int = 256) -> SpectralSplit:
    """Split the roots of ``p`` into expanding, unimodular and contracting.

    Multiplicities come from exact factorisation over Q, so repeated roots
    never need to be detected numerically.
    """
    if p(0) == 0:
        raise ValueError("p(0) must be non-zero (singular matrix)")
    _, factors = sympy.factor_list(_to_sympy(p))
    roots = []
    fac_out = []
    for f, mult in factors:
        f = sympy.Poly(f, _X, domain="ZZ")
        ip = _from_sympy(f)
        fac_out.append((ip.coeffs, int(mult)))
        g = unimodular_factor(ip)
        recip = g.degree > 0
        for z, kind, is_real in _classify_factor(f, recip, budget_bits):
            roots.append(Eigenvalue(z, int(mult), kind, ip.coeffs, is_real))
    order = {EXPANDING: 0, UNIMODULAR: 1, CONTRACTING: 2}
    roots.sort(key=lambda r: (order[r.kind], -abs(r.value), -r.value.real, -r.value.imag))
    return SpectralSplit(tuple(roots), tuple(fac_out))

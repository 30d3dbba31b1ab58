"""Positional numeration systems with an integer matrix base.

Given a non-singular M in Z^{m x m}, synthesise a finite digit set, encode
vectors as finite sums sum_k M^k d_k (k may be negative), decode them exactly,
and decide whether every vector with a power-of-det(M) denominator is
representable.
"""

from .decider import EqualityVerdict, basis_vector_condition, check_fin_properties, decide_equality
from .digits import DigitSet, SumAlphabet, Synthesis, synthesize_alphabet
from .encoder import (Lift, NotRepresentable, Representation, decode, encode, lift_fractional,
                      search_encode, shift)
from .errors import MatnumError
from .exactlinalg import IntMatrix, IntPolynomial, ScaledVector, adjugate, char_poly, det
from .jordan import JordanPlan, build_plan, project, real_jordan, scale_lattice
from .oracle import SearchBudget, brute_force_encode, brute_force_reachable
from .spectrum import SpectralSplit, classify

__all__ = [
    "EqualityVerdict", "basis_vector_condition", "check_fin_properties", "decide_equality",
    "DigitSet", "SumAlphabet", "Synthesis", "synthesize_alphabet",
    "Lift", "NotRepresentable", "Representation", "decode", "encode", "lift_fractional",
    "search_encode", "shift", "MatnumError",
    "IntMatrix", "IntPolynomial", "ScaledVector", "adjugate", "char_poly", "det",
    "JordanPlan", "build_plan", "project", "real_jordan", "scale_lattice",
    "SearchBudget", "brute_force_encode", "brute_force_reachable",
    "SpectralSplit", "classify",
]

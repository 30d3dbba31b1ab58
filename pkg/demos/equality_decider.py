"""
When are all 1/det-adic vectors reachable?
==========================================

Two matrices with determinant +-2. For the first, every vector with a power of
2 in the denominator has a finite expansion; for the second, (1/2, 0) never
does, whatever the (integer) digits.
"""

from matnum import decide_equality, basis_vector_condition, lift_fractional
from matnum.exactlinalg import ScaledVector, mat_pow_mod

M1 = [[2, 1], [2, 2]]
M2 = [[1, 2], [2, 2]]

for M in (M1, M2):
    print(M, decide_equality(M).to_dict())

# the witness is one modular power
print(mat_pow_mod(M1, 2, 2))

# per coordinate: how many factors of M clear the denominator of e_i / det
print([basis_vector_condition(M1, i) for i in range(2)])
print([basis_vector_condition(M2, i) for i in range(2)])

# M2 is idempotent mod 2, so (1, 0) never reaches zero
half = ScaledVector((1, 0), 1, -2)
print(lift_fractional(M2, half))
print(lift_fractional(M1, ScaledVector((1, 0), 1, 2)))

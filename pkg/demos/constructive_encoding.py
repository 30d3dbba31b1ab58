"""
Constructive encoding for the Tribonacci-like base
==================================================

The companion matrix of x^3 + x^2 - x + 1 has one expanding real eigenvalue
near -1.839 and a contracting complex pair. The synthesised alphabet works
block by block in real Jordan coordinates and then rounds to the lattice.
"""

import numpy as np

from matnum import (ScaledVector, build_plan, char_poly, classify, decode, encode,
                    synthesize_alphabet)

T = [[0, 0, -1], [1, 0, 1], [0, 1, -1]]

split = classify(char_poly(T))
print("dims (expanding, unimodular, contracting):", split.dims)

plan = build_plan(T)
print("J =\n", np.round(plan.J, 4))
print("alpha", plan.alpha, "residual", plan.residual)

S = synthesize_alphabet(T)
print(len(S.lattice_digits), "base digits, C =", round(S.C, 4))

z = (40, -17, 3)
rep, trace = encode(T, z, synthesis=S)
print(rep)
print(trace.summary())
assert decode(T, rep) == ScaledVector(z, 0, -1)

# the digit steps walk the Jordan coordinates into the C-ball
x = plan.coords(z)
for k, d in enumerate(trace.digits[:6]):
    print(k, np.round(x, 3), d)
    x = plan.J @ x - plan.P @ np.array(d, dtype=float)

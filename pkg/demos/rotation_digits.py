"""
Quarter-turn rotation with two digits
=====================================

The rotation M = [[0, 1], [-1, 0]] has determinant 1 and both eigenvalues on
the unit circle. Still the tiny digit set {0, e1} reaches every integer
vector, because M^4 = I and M^3 e1 = e2.
"""

import itertools

import numpy as np

from matnum import DigitSet, Representation, decode, encode
from matnum.exactlinalg import ScaledVector

M = [[0, 1], [-1, 0]]
digits = DigitSet(((0, 0), (1, 0)))

# e1 repeats every four steps, e2 sits at exponent 3 mod 4
for k in range(8):
    print(k, decode(M, Representation.from_map({k: (1, 0)})))

# (a, b) = a copies of M^(4k) e1 plus b copies of M^(4k+3) e1
a, b = 2, 3
terms = {4 * k: (1, 0) for k in range(1, a + 1)}
terms.update({4 * k + 3: (1, 0) for k in range(1, b + 1)})
print("closed form:", decode(M, Representation.from_map(terms)))

# the search encoder finds shorter strings using negative exponents
rep, trace = encode(M, (a, b), digits, strategy="search")
print("search:", rep, "window", trace.window)

# term counts over a small box
counts = np.zeros((11, 11), dtype=int)
for x, y in itertools.product(range(-5, 6), repeat=2):
    rep, _ = encode(M, (x, y), digits, strategy="search")
    assert decode(M, rep) == ScaledVector((x, y), 0, 1)
    counts[y + 5, x + 5] = len(rep)
print(counts[::-1])

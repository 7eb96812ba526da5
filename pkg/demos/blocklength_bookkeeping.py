"""Exact small-blocklength checks behind the coding argument.

Counts type classes, collapses rounds of permutations and local channels
into a single semi-global operation, and evaluates the dephasing/permutation
gap exactly for n = 1, 2, 3.
"""

import math

import numpy as np

from qcap import BipartitePureState, enumerate_types, erasure_channel, lemma8_gap, normalize_rounds, random_channel

for k, n in ((2, 4), (3, 4)):
    ts = enumerate_types(k, n)
    print(f"alphabet {k}, n={n}: {len(ts)} types (bound {(n + 1) ** k}), sizes sum to {sum(t.size for t in ts)}")

rng = np.random.default_rng(0)
rounds = [((1, 2, 0), [random_channel(2, 2, rng) for _ in range(3)]), ((2, 1, 0), [random_channel(2, 2, rng) for _ in range(3)])]
op = normalize_rounds(rounds)
print(f"two rounds collapse to net permutation {op.perm} with composed local channels")

m = erasure_channel(2, 0.4)
phi = BipartitePureState.from_schmidt(0.3)
for n in (1, 2, 3):
    res = lemma8_gap(m, phi, n)
    print(f"n={n}: n I(B:E_B) - I(labels : B^n E_B^n) = {res.lhs:.6f} <= {res.bound:.4f} = 2 log {n + 1}")
print(f"single-letter I(B:E_B) = {res.mi_sigma:.6f}; the gap grows only logarithmically: {math.log2(4):.1f} bits of slack per qubit at n=3")

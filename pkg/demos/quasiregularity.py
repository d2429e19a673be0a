"""
Weak quasi-regularity of harmonic gradients
===========================================

The ratio gamma^2 compares, on a Carleson box, the energy of HF in its
strongest direction with its weakest direction.  In one dimension the
gradient of a harmonic function is conformal, so gamma^2 = 1.  A degenerate
field such as x1^2 - y^2 in d = 2 annihilates a direction and is flagged.
"""

import numpy as np

from zygmund import NadicCube, SaddleField, TrigPolynomial, WeierstrassField, descendants, weak_qr_sweep

Q = NadicCube.root(1)
W1 = WeierstrassField(TrigPolynomial.cosine(1), 2.0)
reports = weak_qr_sweep(W1, descendants(Q, 3), m=16)
print("d = 1, cos base, generation 3 cubes")
for r in reports:
    print(f"  {r.address:6s} gamma^2 = {r.gamma_sq:.15f}")

W2 = WeierstrassField(TrigPolynomial.cos_sum(2), 2.0)
g2 = [r.gamma_sq for r in weak_qr_sweep(W2, descendants(NadicCube.root(2), 2), m=8)]
print(f"\nd = 2, cos x1 + cos x2: gamma^2 ranges over [{min(g2):.3f}, {max(g2):.3f}]")

r = weak_qr_sweep(SaddleField(2), [NadicCube.root(2)], m=8)[0]
print("\nx1^2 - y^2: Gram eigenvalues", np.round(r.gram_eigenvalues, 6), "flagged:", r.flagged)

"""
The Weierstrass function and its harmonic extension
====================================================

f(x) = sum_n 2^-n cos(2 pi 2^n x) is continuous and nowhere differentiable.
Its bounded harmonic extension F(x, y) to the upper half-plane is smooth,
and the size of grad F along the vertical ray above x tells how f behaves
near x.
"""

import numpy as np

from zygmund import WeierstrassField, TrigPolynomial, evaluate_jets, ray_profile, slow_score

W = WeierstrassField(TrigPolynomial.cosine(1), b=2.0)

# boundary values and the extension at a few heights
x = np.linspace(0, 1, 9)
print("x      f(x)     F(x, 0.1)  F(x, 0.001)")
for xi, f0, f1, f2 in zip(x, W(x), evaluate_jets(W, x, 0.1).value, evaluate_jets(W, x, 1e-3).value):
    print(f"{xi:.3f}  {f0:+.5f}  {f1:+.5f}   {f2:+.5f}")

# F is harmonic: the Hessian is trace free up to rounding
rng = np.random.default_rng(0)
J = evaluate_jets(W, rng.random(1000), rng.uniform(0.01, 1, 1000))
print("\nmax |trace HF| / (1 + |HF|):", float(np.max(np.abs(J.trace) / (1 + J.hessian_norm))))

# Along the ray above x = 0 (the maximum of f) the tangential derivative
# stays bounded; above a generic point it wanders.
for x0 in (0.0, 0.1234):
    p = ray_profile(W, [x0], 1e-9, points_per_decade=1)
    print(f"\n|dF/dx| above x = {x0}:")
    for y, t in zip(p.y_grid, p.tangential_norms):
        print(f"  y = {y:.0e}   {t:8.3f}")

# The same picture from the boundary: first-difference quotients of f.
for x0 in (0.0, 1 / 3, 0.1234):
    s = slow_score(W, [x0], 1e-9, 0.25)
    print(f"\nmax |f(x+h) - f(x)|/h at x = {x0:.4f}, h = 2^-2 .. 2^-29:")
    print("  " + " ".join(f"{q:.1f}" for q in s.quotients[::4]))

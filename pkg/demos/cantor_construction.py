"""
Stopping times and a Cantor set of slow points
==============================================

Starting from the unit interval, the stopping time keeps subdividing until
the face average of grad F moves by more than M = R cos(theta).  Children
whose average moved towards the origin (inside a cone of aperture theta)
are kept, and the process repeats.  Along every kept nest the averages
stay bounded, so grad F stays bounded on the vertical rays above the limit
set.

This run reports what the construction achieves at finite depth.  The
dimension bound needs every parent to keep some children (beta > 0).  Near
dyadic points, where f has its extremal cusps, some parents keep none.
"""

import math
import warnings

import numpy as np

from zygmund import (
    NadicCube,
    TrigPolynomial,
    WeierstrassField,
    bloch_seminorm,
    calibrate_constant,
    cantor_build,
    check_tree,
    face_average_gradient,
    verify_bounded_ray,
)

W = WeierstrassField(TrigPolynomial.cosine(1), 2.0)
Q0 = NadicCube.root(1)
theta = math.pi / 3

bloch = bloch_seminorm(W, x_box=Q0).value
cal = calibrate_constant(W, Q0, 8, bloch)
R = max(cal.jump / math.cos(theta), float(np.linalg.norm(face_average_gradient(W, Q0))))
print(f"Bloch estimate {bloch:.3f}, largest parent-to-child jump {cal.jump:.3f}, R = {R:.3f}")

with warnings.catch_warnings():
    warnings.simplefilter("ignore", RuntimeWarning)
    tree = cantor_build(W, Q0, R * math.cos(theta), theta, K=3, J_max=8)

print("\n k  cubes  max ratio  min kept mass  unresolved  parents keeping nothing")
for s in tree.summaries:
    print(f" {s.k}  {s.count:5d}  {s.measured_alpha:9.4f}  {s.measured_beta:13.4f}"
          f"  {s.unresolved_fraction:10.3f}  {s.dead_parents}")

inv = check_tree(W, tree)
ray = verify_bounded_ray(W, tree, R)
print(f"\ninvariants: {len(inv.violations)} violations over {inv.checked} stopped cubes")
print(f"rays: sup |grad F| / 2R = {ray.max_ratio:.3f} over {ray.checked_points} points")
db = tree.dim_bound()
print(f"dimension bound: alpha = {db.alpha}, beta = {db.beta}, valid = {db.valid}")

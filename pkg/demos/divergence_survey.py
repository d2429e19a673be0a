"""
Directional divergence at finite scale
======================================

For phi = cos x1 + cos x2 the tangential derivative D_e F should blow up
along almost every vertical ray.  At finite scale this shows up as the
fraction of rays whose running sup of |D_e F| exceeds a threshold, which
grows as the height floor drops.
"""

import numpy as np

from zygmund import TrigPolynomial, WeierstrassField, check_condition_H, directional_divergence_survey
from zygmund.trig import default_directions

phi = TrigPolynomial.cos_sum(2)
verdicts = {r.verdict for r in check_condition_H(phi, default_directions(2), 1.0, 1e-3)}
print("condition H verdicts over sampled directions:", sorted(verdicts))

W = WeierstrassField(phi, 2.0)
x = np.random.default_rng(0).random((1000, 2))
floors = 2.0 ** -np.arange(5, 21)
s = directional_divergence_survey(W, [1.0, 0.0], x, floors)

print("\nfloor      " + "  ".join(f"> {t:6.2f}" for t in s.thresholds))
for j, fl in enumerate(s.floors):
    print(f"2^-{j + 5:<2d}     " + "  ".join(f"{s.exceedance[k, j]:8.3f}" for k in range(s.thresholds.size)))

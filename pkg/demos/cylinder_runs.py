"""Long runs of one symbol: block versus Smith length laws.

Under the block family the escape probability of ``a^n`` cycles with
``n mod a``; under the Smith family it settles at ``1 - r`` with ``r`` the
dominant root of the run recursion.  The last part draws rescaled hitting
times and compares them with the unit exponential.
"""

import numpy as np

from regenclust import cylinders as cyl
from regenclust import montecarlo as mc
from regenclust.model import block, finite, smith

blk = block(finite([0.5, 0.1, 0.4]))
print("block family, a = 3, p_3 = 0.4")
print(f"{'n':>3} {'s_n':>4} {'mu':>12} {'theta1':>8} {'E_E(N)':>8} {'sojourn':>8}")
for n in range(4, 13):
    d = cyl.euclid_decomposition(n, 3)
    print(f"{n:>3} {d.s_n:>4} {cyl.mu_cylinder(blk, 3, n):12.6e} "
          f"{cyl.theta1_cylinder(blk, 3, n):8.4f} {cyl.cluster_mean_entering_cyl(blk, 3, n):8.4f} "
          f"{cyl.sojourn_mean_cyl(blk, 3, n):8.4f}")

sm = smith(finite([0.4, 0.3, 0.3]))
r = cyl.dominant_root(sm, 2)
print(f"\nSmith family, a = 2, p_2 = 0.3: dominant root r = {r:.10f}")
for n in (10, 50, 100, 200, 300):
    print(f"  n = {n:>3}  theta1 = {cyl.theta1_cylinder(sm, 2, n):.10f}   1 - r = {1 - r:.10f}")

# hitting times, scaled by theta1 * mu
for label, model, a, n in (("block", blk, 3, 7), ("block", blk, 3, 16), ("smith", sm, 2, 40)):
    sample = mc.estimate_hitting_scaled(model, a, n, 50_000, seed=7)
    atom = np.mean(sample.values == sample.scale)
    print(f"{label:>6} a={a} n={n:>2}: KS = {mc.ks_exponential(sample):.4f}, "
          f"P(tau = 1) = {atom:.4f}")
# At n = 7 the block pattern still has mu near 0.1, so the mass at tau = 1
# alone keeps the sample away from a continuous law.

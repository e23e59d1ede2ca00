"""Exceedance clusters of a Smith-type regenerative process.

Walks through the level grid for a geometric symbol law: the escape
probability, the cluster mean seen from a cluster start, and the mean run
seen from an arbitrary exceedance.  Each closed form is set beside a Monte
Carlo estimate and, where the law is truncated, an exact enumeration.

Run with ``python demos/exceedance_clusters.py``.
"""

from regenclust import indices, oracle
from regenclust import montecarlo as mc
from regenclust.model import Geometric, smith
from regenclust.observables import Exceedance

N_SAMPLES = 200_000
SEED = 42

model = smith(Geometric(0.5))
exact_model = model.truncate(40)  # enumeration needs a finite alphabet

print(f"{'a':>3} {'theta1':>9} {'oracle':>9} {'mc':>9} {'E_E(N)':>8} {'mc':>8} "
      f"{'sojourn':>8} {'mc':>8}")
for a in range(1, 9):
    obs = Exceedance(a)
    theta = indices.theta1_exceedance(model, a)
    exact = oracle.exact_theta_q(exact_model, obs, 1).mid
    th = mc.estimate_theta_q(model, obs, 1, N_SAMPLES, SEED + a)
    cl = mc.estimate_cluster_distribution(model, obs, "entering", 1, N_SAMPLES, SEED + 100 + a)
    sj = mc.estimate_cluster_distribution(model, obs, "sojourn", 1, N_SAMPLES, SEED + 200 + a)
    print(f"{a:>3} {theta:9.6f} {exact:9.6f} {th.value:9.6f} "
          f"{indices.cluster_mean_entering(model, a):8.4f} {cl.mean.value:8.4f} "
          f"{indices.sojourn_mean(model, a):8.4f} {sj.mean.value:8.4f}")

# theta1 climbs to 1/2 because every block has mean length 2 here
print("\ntheta1(12) - 1/2 =", indices.theta1_exceedance(model, 12) - 0.5)

# The sojourn mean does not settle at a constant: longer blocks dominate the
# size-biased view as the level rises.
print("sojourn means, levels 2..12:",
      " ".join(f"{indices.sojourn_mean(model, a):.3f}" for a in range(2, 13, 2)))

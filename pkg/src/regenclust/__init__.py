"""Regenerative processes over a countable alphabet and their clustering indices.

Modules
-------
model        symbol laws, block-length families, stationary quantities
simulate     sample paths with explicit regeneration markers
indices      exceedance indices: theta_1, cluster and sojourn moments
cylinders    constant-pattern quantities: renewal recursion, mu(a^n), theta_1(n)
decay        renewal sequence of regenerations
montecarlo   empirical estimators and the hitting-time diagnostic
oracle       exact window probabilities by tiling enumeration
validation   cross-check matrix and errata report
cli          command-line front end
"""

from .errors import (BudgetExceeded, DegenerateLevel, DegeneratePattern, DegenerateSymbol,
                     DivergentMean, InfiniteMoment, NoConditioningEvents, OracleBudgetExceeded,
                     RegenError)
from .model import (IID, Block, FiniteTable, Geometric, ModelSpec, Smith, Table, block, finite,
                    iid, nu, regen_prob, smith, stationary_marginal, table, tail_e, tail_g)
from .observables import Cylinder, Exceedance
from .simulate import (RandomStream, Trajectory, read_trajectory, sample_block,
                       simulate_from_regeneration, simulate_stationary, write_trajectory)

__version__ = "0.1.0"

"""Closed-form clustering indices for exceedances of a level.

For ``U = {X_0 > a}`` a cluster is a maximal run of exceedances.  A run that
starts at a cluster start ``E = {X_{-1} <= a, X_0 > a}`` necessarily starts a
new block at time 0, so the run length splits as ``N = F + N'`` where ``F`` is
the length of that first block and ``N'`` counts the exceedances contributed
by the following blocks, started afresh at a regeneration.  Everything below
follows from that decomposition and the partial moments ``e_a, m_a, m2_a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import oracle
from .errors import DegenerateLevel, InfiniteMoment
from .model import ModelSpec, partial_moments
from .observables import Cylinder, Exceedance


def _moments(model: ModelSpec, a: int):
    e, m, m2 = partial_moments(model, a)
    if e <= 0.0 or m <= 0.0:
        raise DegenerateLevel(f"level {a} is never exceeded")
    if e >= 1.0:
        raise DegenerateLevel(f"level {a} is exceeded at every regeneration")
    return e, m, m2


def theta1_exceedance(model: ModelSpec, a: int) -> float:
    """Escape probability ``P(X_1 <= a | X_0 > a) = e_a (1 - e_a) / m_a``.

    ``{X_0 > a, X_1 <= a}`` forces a block start at time 1, whose symbol is
    independent of the past.
    """
    e, m, _ = _moments(model, a)
    return e * (1.0 - e) / m


def entering_block_moments(model: ModelSpec, a: int) -> tuple[float, float]:
    """``(E_E(F), E_E(F^2))`` for the block entered at a cluster start."""
    e, m, m2 = partial_moments(model, a)
    if e <= 0.0:
        raise DegenerateLevel(f"level {a} is never exceeded")
    return m / e, m2 / e


def regen_cluster_moments(model: ModelSpec, a: int) -> tuple[float, float]:
    """First two moments of the exceedance run started at a regeneration.

    Returns ``(0, 0)`` above the support.  Conditioning on the first block,
    ``x = m_a + e_a x`` and ``y = m2_a + 2 m_a x + e_a y``.
    """
    e, m, m2 = partial_moments(model, a)
    if e <= 0.0:
        return 0.0, 0.0
    if e >= 1.0:
        raise DegenerateLevel(f"level {a} is exceeded at every regeneration")
    x = m / (1.0 - e)
    y = (m2 + 2.0 * m * x) / (1.0 - e)
    return x, y


def cluster_mean_entering(model: ModelSpec, a: int) -> float:
    """``E_E(N) = m_a / (e_a (1 - e_a))``, the reciprocal of ``theta1_exceedance``."""
    e, m, _ = _moments(model, a)
    return m / (e * (1.0 - e))


def cluster_second_moment_entering(model: ModelSpec, a: int) -> float:
    """``E_E(N^2) = E_E(F^2) + 2 E_E(F) x + y``; ``F`` and ``N'`` are independent."""
    f1, f2 = entering_block_moments(model, a)
    x, y = regen_cluster_moments(model, a)
    return f2 + 2.0 * f1 * x + y


def sojourn_from_moments(theta1: float, mean: float, second: float) -> float:
    """Mean run length seen from a stationary occurrence.

    A stationary occurrence falls uniformly inside a cluster drawn with
    size-biased weight, so the remaining length has mean
    ``(E_E(N^2) + E_E(N)) / (2 E_E(N))`` and ``1 / E_E(N) = theta1``.
    """
    return 0.5 * theta1 * (second + mean)


def sojourn_mean(model: ModelSpec, a: int) -> float:
    """Mean number of exceedances from time 0 onwards given ``X_0 > a``.

    Level above the support gives 0.
    """
    e, m, m2 = partial_moments(model, a)
    if e <= 0.0:
        return 0.0
    if not math.isfinite(m2):
        raise InfiniteMoment(f"second block moment above level {a} diverges")
    theta = theta1_exceedance(model, a)
    return sojourn_from_moments(theta, cluster_mean_entering(model, a),
                                cluster_second_moment_entering(model, a))


@dataclass(frozen=True)
class ClusterStatistics:
    mean_entering: float
    second_moment_entering: float
    mean_regen: float
    second_moment_regen: float
    sojourn_mean: float

    def __post_init__(self):
        for name in ("mean_entering", "second_moment_entering", "mean_regen",
                     "second_moment_regen", "sojourn_mean"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def cluster_statistics(model: ModelSpec, a: int) -> ClusterStatistics:
    x, y = regen_cluster_moments(model, a)
    return ClusterStatistics(
        mean_entering=cluster_mean_entering(model, a),
        second_moment_entering=cluster_second_moment_entering(model, a),
        mean_regen=x,
        second_moment_regen=y,
        sojourn_mean=sojourn_mean(model, a),
    )


def entering_cluster_pmf(model: ModelSpec, a: int, k_max: int) -> np.ndarray:
    """``P_E(N = k)`` for ``k = 0..k_max`` (entry 0 is 0).

    ``N = F + N'``: ``F`` has pmf ``sum_{j>a} p_j q_j(k) / e_a`` and ``N'``
    solves the renewal equation ``h(0) = 1 - e_a``,
    ``h(n) = sum_{j>a, k<=n} p_j q_j(k) h(n - k)``.  Needs a finite law.
    """
    e = model.symbol_law.tail(a)
    if e <= 0.0 or e >= 1.0:
        raise DegenerateLevel(f"level {a} is degenerate")
    step = np.zeros(k_max + 1)  # sum_{j>a} p_j q_j(k)
    symbols, probs = model.symbol_law.table()
    for s, p in zip(symbols.tolist(), probs.tolist()):
        if s <= a:
            continue
        lengths, q = model.block_family.pmf(s)
        keep = lengths <= k_max
        np.add.at(step, lengths[keep], p * q[keep])
    h = np.zeros(k_max + 1)
    h[0] = 1.0 - e
    for n in range(1, k_max + 1):
        h[n] = step[1:n + 1] @ h[n - 1::-1]
    first = step / e
    pmf = np.convolve(first, h)[:k_max + 1]
    return pmf


def theta_q_bound(model: ModelSpec, observable, q: int) -> float:
    """``q * P(U | R_0)``, the bound on ``|1 - theta_q / theta_1|``."""
    if q < 1:
        raise ValueError("q must be at least 1")
    if isinstance(observable, Exceedance):
        return q * model.symbol_law.tail(observable.level)
    from .cylinders import cyl_prob_given_regen

    sol = cyl_prob_given_regen(model, observable.symbol, observable.length)
    return q * sol.values[observable.length - 1]


def theta_q_exact_small(model: ModelSpec, observable, q: int,
                        budget: int = oracle.DEFAULT_BUDGET) -> float:
    """``theta_q`` by enumeration, for ``q <= 8`` on a finite-support model.

    Raises ``OracleBudgetExceeded`` when the enumeration does not fit.
    """
    if not 1 <= q <= 8:
        raise ValueError("theta_q_exact_small handles 1 <= q <= 8")
    if not model.finite:
        raise ValueError("theta_q_exact_small needs a finite-support model")
    return oracle.exact_theta_q(model, observable, q, budget).mid


def feasible_levels(model: ModelSpec) -> list[int]:
    """Levels ``a >= 1`` with ``0 < e_a < 1`` on a finite-support model."""
    top = model.symbol_law.max_symbol
    return [a for a in range(1, top) if 0.0 < model.symbol_law.tail(a) < 1.0]


__all__ = [
    "ClusterStatistics", "Cylinder", "Exceedance", "cluster_mean_entering",
    "cluster_second_moment_entering", "cluster_statistics", "entering_block_moments",
    "entering_cluster_pmf", "feasible_levels", "regen_cluster_moments", "sojourn_from_moments",
    "sojourn_mean", "theta1_exceedance", "theta_q_bound", "theta_q_exact_small",
]

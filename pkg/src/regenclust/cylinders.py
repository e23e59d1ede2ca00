"""Constant cylinders ``a^n = {X_0 = ... = X_{n-1} = a}``.

Only blocks of symbol ``a`` can write the pattern, so everything reduces to
the run of ``a``-blocks that follows a regeneration.  With ``c_k = p_a q_a(k)``
the probability ``P(m)`` that the first ``m`` letters after a regeneration
are all ``a`` solves

    P(m) = sum_k c_k P(m - k),   P(m) = 1 for m <= 0.

Block family: ``P(m) = p_a ** ceil(m / a)``.  Smith family: ``c_1 = p_a (a-1)/a``
and ``c_{a+1} = p_a / a``, whose characteristic polynomial is
``x^a (x - q) - p`` with ``q = c_1`` and ``p = c_{a+1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import DegeneratePattern, DegenerateSymbol, RegenError
from .indices import sojourn_from_moments
from .model import Block, ModelSpec, Smith

ROOT_XTOL = 1e-12
ROOT_MAXITER = 200
# cluster sums stop once P(n + k - 1) / P(n) falls below this
_SUM_CUTOFF = 1e-20


@dataclass(frozen=True)
class EuclidDecomposition:
    """``n = ceil_part * a - s_n`` with ``0 <= s_n < a``, and ``r_n = a - s_n``."""

    n: int
    a: int
    ceil_part: int
    s_n: int
    r_n: int

    def __iter__(self):
        return iter((self.ceil_part, self.s_n, self.r_n))


def euclid_decomposition(n: int, a: int) -> EuclidDecomposition:
    if n < 1 or a < 1:
        raise ValueError("n and a must be positive")
    c = -(-n // a)
    s = c * a - n
    return EuclidDecomposition(n, a, c, s, a - s)


def _step_weights(model: ModelSpec, a: int) -> np.ndarray:
    """``c[k] = p_a q_a(k)`` indexed by length."""
    p = model.pmf(a)
    lengths, q = model.block_family.pmf(a)
    c = np.zeros(int(lengths.max()) + 1)
    np.add.at(c, lengths, p * q)
    return c


def _recursion(c: np.ndarray, n_max: int) -> np.ndarray:
    """``P(0..n_max)`` for the renewal recursion with weights ``c``."""
    L = len(c) - 1
    # P(m) for m in -L..n_max; offset L maps m -> index m + L
    P = np.ones(n_max + L + 1)
    w = c[1:][::-1]  # w[i] multiplies P(m - L + i)
    for m in range(1, n_max + 1):
        i = m + L
        P[i] = w @ P[i - L:i]
    return P[L:]


def renewal_root(c: np.ndarray) -> float:
    """Unique ``r`` in ``(0, 1)`` with ``sum_k c_k r**(-k) = 1`` (needs ``0 < sum c < 1``)."""
    total = c.sum()
    if not 0.0 < total < 1.0:
        raise DegenerateSymbol("renewal root needs 0 < p_a < 1")
    k = np.nonzero(c)[0]

    def f(x):
        return 1.0 - float(c[k] @ x ** (-k.astype(float)))

    # f is increasing with f(1) = 1 - p_a > 0; at lo a single term already reaches 1
    lo = float(np.min(c[k] ** (1.0 / k)))
    if f(lo) >= 0.0:
        return lo
    return bisect(f, lo, 1.0, xtol=ROOT_XTOL, maxiter=ROOT_MAXITER)


def _root_multiplier(c: np.ndarray, r: float) -> float:
    """``K_1`` in ``P(m) ~ K_1 r**m`` from the residue of the generating function."""
    k = np.arange(len(c), dtype=float)
    z = 1.0 / r
    # G(z) = B(z) / (1 - C(z)),  B(z) = sum_k c_k (z + ... + z**k)
    B = float(c @ np.array([z * (1 - z**j) / (1 - z) for j in k]))
    dC = float(c @ (k * z ** (k - 1)))
    return B / (z * dC)


@dataclass(frozen=True)
class RecursionSolution:
    """``values[m - 1] = P(X_0^{m-1} = a | R_0)`` for ``m = 1..n_max``."""

    symbol: int
    values: np.ndarray
    dominant_root: float | None = None
    root_multiplier: float | None = None

    def prob(self, m: int) -> float:
        if m <= 0:
            return 1.0
        return float(self.values[m - 1])


def cyl_prob_given_regen(model: ModelSpec, a: int, n_max: int) -> RecursionSolution:
    """Solve the cylinder renewal recursion up to ``n_max``.

    The dominant root is reported when the recursion has a single root of
    largest modulus (``0 < p_a < 1`` and the block lengths of ``a`` have gcd 1).
    """
    c = _step_weights(model, a)
    P = _recursion(c, max(n_max, 0))
    r = k1 = None
    lengths = np.nonzero(c)[0]
    if 0.0 < c.sum() < 1.0 and math.gcd(*lengths.tolist()) == 1:
        r = renewal_root(c)
        k1 = _root_multiplier(c, r)
    return RecursionSolution(a, P[1:], r, k1)


def dominant_root(model: ModelSpec, a: int) -> float:
    """Root of ``x^a (x - q) - p`` in ``(q, 1)`` for the Smith family, by bisection."""
    if not isinstance(model.block_family, Smith):
        raise RegenError("dominant_root is defined for the Smith family; see renewal_root")
    p_a = model.pmf(a)
    if a < 2:
        raise DegenerateSymbol("symbol 1 writes deterministic pairs: two roots of equal modulus")
    if not 0.0 < p_a < 1.0:
        raise DegenerateSymbol(f"p_{a} must lie strictly between 0 and 1")
    q = p_a * (a - 1) / a
    p = p_a / a

    def f(x):
        return x**a * (x - q) - p

    assert f(q) < 0.0 < f(1.0)
    return bisect(f, q, 1.0, xtol=ROOT_XTOL, maxiter=ROOT_MAXITER)


def mu_cylinder(model: ModelSpec, a: int, n: int, sol: RecursionSolution | None = None) -> float:
    """Stationary ``P(a^n)`` by summing over the block covering time 0.

    A covering ``a``-block of length ``l`` seen at offset ``j`` supplies
    ``l - j`` letters; the rest must come after the next regeneration.
    """
    if n < 1:
        raise ValueError("n must be positive")
    p_a = model.pmf(a)
    if p_a == 0.0:
        return 0.0
    sol = sol if sol is not None and len(sol.values) >= n else cyl_prob_given_regen(model, a, n)
    lengths, q = model.block_family.pmf(a)
    terms = []
    for ell, ql in zip(lengths.tolist(), q.tolist()):
        for supplied in range(1, ell + 1):
            terms.append(p_a * ql * sol.prob(n - supplied))
    return math.fsum(terms) / model.nu


def mu_cylinder_block(model: ModelSpec, a: int, n: int) -> float:
    """Block-family closed form ``p_a^{ceil(n/a)} (s_n + 1 + (r_n - 1) p_a) / nu``."""
    p = model.pmf(a)
    c, s, r = euclid_decomposition(n, a)
    return p**c * (s + 1 + (r - 1) * p) / model.nu


def theta1_cylinder(model: ModelSpec, a: int, n: int) -> float:
    """``1 - mu(a^{n+1}) / mu(a^n)``.

    Evaluated as ``(1 - p_a) P(n) / (nu mu(a^n))``: the run ends at ``n - 1``
    exactly when a non-``a`` block starts at ``n``.  Same number, no cancellation.
    """
    sol = cyl_prob_given_regen(model, a, n)
    mu = mu_cylinder(model, a, n, sol)
    if mu <= 0.0:
        raise DegeneratePattern(f"pattern {a}^{n} never occurs")
    return (1.0 - model.pmf(a)) * sol.prob(n) / (model.nu * mu)


def theta1_cylinder_block(model: ModelSpec, a: int, n: int) -> float:
    p = model.pmf(a)
    if p == 0.0:
        raise DegeneratePattern(f"pattern {a}^{n} never occurs")
    _, s, r = euclid_decomposition(n, a)
    return (1.0 - p) / (s + 1 + (r - 1) * p)


def _feasible(model, a):
    p = model.pmf(a)
    if p <= 0.0:
        raise DegeneratePattern(f"symbol {a} has no mass")
    if p >= 1.0:
        raise DegeneratePattern(f"symbol {a} is the only symbol: runs never end")
    return p


def cluster_tail_cyl(model: ModelSpec, a: int, n: int, k: int) -> float:
    """``P_E(N >= k) = P(n + k - 1) / P(n)`` for the entering-conditioned cluster.

    Block family: ``p_a ** ceil((k - s_n - 1) / a)``, exponent 0 when negative.
    """
    p = _feasible(model, a)
    if k <= 1:
        return 1.0
    if isinstance(model.block_family, Block):
        _, s, _ = euclid_decomposition(n, a)
        return p ** max(0, -(-(k - s - 1) // a))
    sol = cyl_prob_given_regen(model, a, n + k - 1)
    return sol.prob(n + k - 1) / sol.prob(n)


def _cluster_sums(model, a, n):
    """``(E_E(N), E_E(N^2))`` summed from the exact tail ``P(n + k - 1) / P(n)``."""
    p = model.pmf(a)
    L = model.block_family.max_length(a)
    # P drops at least by p_a every L letters
    extra = int(L * (math.log(_SUM_CUTOFF) / math.log(p) + 2)) + 1
    sol = cyl_prob_given_regen(model, a, n + extra)
    tail = sol.values[n - 1:] / sol.values[n - 1]
    k = np.arange(1, len(tail) + 1)
    return math.fsum(tail.tolist()), math.fsum(((2 * k - 1) * tail).tolist())


def cluster_mean_entering_cyl(model: ModelSpec, a: int, n: int) -> float:
    """Mean cluster size of ``a^n`` from a cluster start.

    Block family: ``s_n + 1 + a p_a / (1 - p_a)``.  Otherwise the exact tail
    sum; it equals ``1 / theta1_cylinder``.
    """
    p = _feasible(model, a)
    if isinstance(model.block_family, Block):
        _, s, _ = euclid_decomposition(n, a)
        return s + 1 + a * p / (1.0 - p)
    return _cluster_sums(model, a, n)[0]


def smith_cluster_mean_limit(model: ModelSpec, a: int) -> float:
    """Large-``n`` limit ``1 / (1 - r)`` of the Smith cylinder cluster mean."""
    return 1.0 / (1.0 - dominant_root(model, a))


def block_cylinder_moments(model: ModelSpec, a: int, n: int) -> dict:
    """Pieces of the block-family sojourn computation.

    ``F = s_n + 1`` letters come from the first block; each further
    ``a``-block adds ``a``, so the remainder is ``a`` times a geometric count.
    """
    p = _feasible(model, a)
    _, s, _ = euclid_decomposition(n, a)
    f = s + 1.0
    x = a * p / (1.0 - p)
    y = a * a * p * (1.0 + p) / (1.0 - p) ** 2
    return {"F": f, "regen_mean": x, "regen_second": y,
            "mean": f + x, "second": f * f + 2 * f * x + y}


def sojourn_mean_cyl(model: ModelSpec, a: int, n: int) -> float:
    """Mean remaining cluster size of ``a^n`` seen from a stationary occurrence."""
    _feasible(model, a)
    if isinstance(model.block_family, Block):
        mom = block_cylinder_moments(model, a, n)
        return sojourn_from_moments(theta1_cylinder_block(model, a, n), mom["mean"], mom["second"])
    mean, second = _cluster_sums(model, a, n)
    return sojourn_from_moments(theta1_cylinder(model, a, n), mean, second)

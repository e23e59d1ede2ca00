"""Monte Carlo estimators for the analytic quantities.

Every estimator splits its replicas into batches of ``BATCH`` (the last one
possibly shorter).  Batch ``i`` draws from ``RandomStream(seed, i)`` and the
per-batch tallies are reduced in batch order, so the result does not depend
on ``workers``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .cylinders import _step_weights, mu_cylinder, theta1_cylinder
from .errors import BudgetExceeded, DegeneratePattern, NoConditioningEvents
from .model import ModelSpec
from .observables import Exceedance
from .simulate import BlockSampler, RandomStream, simulate_from_regeneration, stationary_windows

BATCH = 10_000
CLUSTER_CAP = 10_000
CORRELATION_BATCHES = 100


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n_samples: int
    master_seed: int
    method: str
    extra: dict = field(default_factory=dict, compare=False)

    def z_score(self, target: float) -> float:
        if self.stderr == 0.0:
            return 0.0 if self.value == target else math.inf
        return (self.value - target) / self.stderr


def _batch_sizes(n: int, batch: int = BATCH) -> list[int]:
    full, rest = divmod(n, batch)
    return [batch] * full + ([rest] if rest else [])


def _run_batches(job, n: int, seed: int, workers: int = 1, batch: int = BATCH) -> list:
    """``job(rng, size)`` per batch; results listed in batch order."""
    sizes = _batch_sizes(n, batch)

    def one(i):
        return job(RandomStream(seed, i).generator, sizes[i])

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, range(len(sizes))))
    return [one(i) for i in range(len(sizes))]


def _good(obs, x):
    return x > obs.level if isinstance(obs, Exceedance) else x == obs.symbol


def _occurs(obs, good, t):
    """Occurrence indicator of ``obs`` at column ``t`` of a window of good flags."""
    return good[:, t:t + obs.width].all(axis=1)


def _binomial(hits: int, total: int, seed: int, method: str, **extra) -> Estimate:
    if total == 0:
        raise NoConditioningEvents(f"{method}: conditioning event never observed")
    v = hits / total
    return Estimate(v, math.sqrt(v * (1.0 - v) / total), total, seed, method, extra)


# ---------------------------------------------------------------------------
# extremal index
# ---------------------------------------------------------------------------


def estimate_theta_q(model: ModelSpec, observable, q: int, n_samples: int, seed: int,
                     workers: int = 1) -> Estimate:
    """Ratio of counts ``#(U and no occurrence at 1..q) / #U`` over stationary windows.

    An observable that cannot occur returns the conventional value 1 with zero
    error.  Standard error: binomial at the observed number of conditioning
    events (the delta-method ratio error for a count ratio).
    """
    if q < 1 or n_samples < 1:
        raise ValueError("need q >= 1 and n_samples >= 1")
    if not observable.feasible(model):
        return Estimate(1.0, 0.0, n_samples, seed, "theta_q:unreachable")
    sampler = BlockSampler(model)
    width = q + observable.width

    def job(rng, size):
        x, _ = stationary_windows(sampler, rng, size, width)
        good = _good(observable, x)
        u = _occurs(observable, good, 0)
        later = np.zeros(size, dtype=bool)
        for t in range(1, q + 1):
            later |= _occurs(observable, good, t)
        return int(u.sum()), int((u & ~later).sum())

    parts = _run_batches(job, n_samples, seed, workers)
    cond = sum(c for c, _ in parts)
    hits = sum(h for _, h in parts)
    return _binomial(hits, cond, seed, "theta_q", draws=n_samples)


# ---------------------------------------------------------------------------
# cluster sizes
# ---------------------------------------------------------------------------


def _run_lengths(sampler: BlockSampler, obs, rng, size: int, conditioning: str, limit: int):
    """Length of the good run starting at time 0, capped at ``limit``, and its conditioning flag."""
    if conditioning == "regeneration":
        run = np.zeros(size, dtype=np.int64)
        alive = np.ones(size, dtype=bool)
        keep = np.ones(size, dtype=bool)
    else:
        s, k, off = sampler.draw_covering(rng, size)
        # the covering block holds time -1; it still has k - off - 1 letters from time 0 on
        ahead = k - off - 1
        before_good = _good(obs, s)
        run = np.where(before_good, ahead, 0)
        alive = before_good | (ahead == 0)
        keep = ~before_good if conditioning == "entering" else np.ones(size, dtype=bool)
        alive &= keep
    active = np.flatnonzero(alive & (run < limit))
    while active.size:
        s, k = sampler.draw(rng, active.size)
        g = _good(obs, s)
        run[active[g]] += k[g]
        alive[active[~g]] = False
        active = active[g]
        active = active[run[active] < limit]
    run = np.minimum(run, limit)
    n = np.maximum(run - obs.width + 1, 0)
    if conditioning == "regeneration":
        return n, keep
    return n, keep & (n >= 1)


@dataclass(frozen=True)
class ClusterEstimate:
    """Empirical law of ``N`` under one conditioning."""

    conditioning: str
    tail: list  # Estimate of P(N >= k), k = 1..k_max
    mean: Estimate
    second_moment: Estimate
    n_conditioned: int
    truncated: int
    cap: int
    histogram: np.ndarray = field(repr=False, compare=False)

    def tail_value(self, k: int) -> Estimate:
        return self.tail[k - 1]


def estimate_cluster_distribution(model: ModelSpec, observable, conditioning: str = "entering",
                                  k_max: int = 20, n_samples: int = 100_000, seed: int = 0,
                                  cap: int = CLUSTER_CAP, workers: int = 1) -> ClusterEstimate:
    """Empirical ``P(N >= k)``, ``E(N)`` and ``E(N^2)``.

    ``conditioning``: ``"entering"`` (a cluster starts at 0), ``"sojourn"``
    (an occurrence at 0, start unknown) or ``"regeneration"`` (a block starts
    at 0; ``N`` may be 0).  Runs are cut at ``cap`` occurrences; the number of
    cut runs is reported in ``truncated``.
    """
    if conditioning not in ("entering", "sojourn", "regeneration"):
        raise ValueError(f"unknown conditioning {conditioning!r}")
    sampler = BlockSampler(model)
    limit = cap + observable.width - 1

    def job(rng, size):
        n, keep = _run_lengths(sampler, observable, rng, size, conditioning, limit)
        return np.bincount(n[keep], minlength=cap + 1)

    hist = np.sum(_run_batches(job, n_samples, seed, workers), axis=0)
    total = int(hist.sum())
    if total == 0:
        raise NoConditioningEvents(f"{conditioning}: conditioning event never observed")
    values = np.arange(cap + 1, dtype=float)
    mean = float(hist @ values) / total
    second = float(hist @ values**2) / total
    fourth = float(hist @ values**4) / total
    at_least = total - np.concatenate([[0], np.cumsum(hist)[:-1]])  # count of N >= k
    tail = [_binomial(int(at_least[k]) if k <= cap else 0, total, seed, f"P(N>={k})")
            for k in range(1, k_max + 1)]
    return ClusterEstimate(
        conditioning=conditioning,
        tail=tail,
        mean=Estimate(mean, math.sqrt(max(second - mean**2, 0.0) / total), total, seed,
                      f"cluster_mean:{conditioning}"),
        second_moment=Estimate(second, math.sqrt(max(fourth - second**2, 0.0) / total), total,
                               seed, f"cluster_second:{conditioning}"),
        n_conditioned=total,
        truncated=int(hist[cap]),
        cap=cap,
        histogram=hist,
    )


# ---------------------------------------------------------------------------
# renewal sequence
# ---------------------------------------------------------------------------


def estimate_correlation(model: ModelSpec, n_max: int, n_samples: int, seed: int,
                         workers: int = 1, n_batches: int = CORRELATION_BATCHES) -> list[Estimate]:
    """Frequency of a block start at lag ``n`` after a block start, ``n = 0..n_max``.

    ``n_batches`` independent trajectories started at a regeneration each
    contribute ``n_samples / n_batches`` origins; the error is that of the
    batch means.
    """
    per = max(1, n_samples // n_batches)
    horizon = int(per * model.nu * 1.2) + n_max + 64

    def one(i):
        h = horizon
        while True:
            starts = simulate_from_regeneration(model, h, RandomStream(seed, i)).regeneration_times
            if len(starts) >= per and starts[per - 1] + n_max <= h:
                break
            h *= 2  # too few blocks by chance: replay the same stream further
        flag = np.zeros(h + 1, dtype=bool)
        flag[starts] = True
        origins = starts[:per]
        return np.array([flag[origins + n].mean() for n in range(n_max + 1)])

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            means = list(pool.map(one, range(n_batches)))
    else:
        means = [one(i) for i in range(n_batches)]
    means = np.array(means)
    value = means.mean(axis=0)
    err = means.std(axis=0, ddof=1) / math.sqrt(n_batches)
    return [Estimate(float(v), float(e), per * n_batches, seed, f"c_{n}")
            for n, (v, e) in enumerate(zip(value, err))]


# ---------------------------------------------------------------------------
# hitting times
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HittingSample:
    """Hitting times of ``a^n`` multiplied by ``scale = theta_1(n) mu(a^n)``."""

    values: np.ndarray
    symbol: int
    length: int
    scale: float
    method: str
    master_seed: int

    def __post_init__(self):
        if np.any(self.values <= 0):
            raise ValueError("rescaled hitting times must be positive")


class _RunScanner:
    """Block-level scan for the first ``t >= 1`` opening ``n`` consecutive ``a``."""

    def __init__(self, sampler, a, n):
        self.sampler, self.a, self.n = sampler, a, n

    def start(self, rng, size):
        s, k, off = self.sampler.draw_covering(rng, size)
        self.pos = k - off  # next block start
        self.run_start = np.where(s == self.a, 0, -1)
        self.tau = np.zeros(size, dtype=np.int64)
        self.done = np.zeros(size, dtype=bool)
        self._check(np.arange(size))

    def _check(self, idx):
        rs = self.run_start[idx]
        first = np.maximum(rs, 1)
        hit = (rs >= 0) & (self.pos[idx] - first >= self.n)
        self.tau[idx[hit]] = first[hit]
        self.done[idx[hit]] = True

    def step(self, rng, idx):
        """Append one block to each path in ``idx``; returns the mask of non-``a`` blocks."""
        s, k = self.sampler.draw(rng, idx.size)
        is_a = s == self.a
        start = self.pos[idx]
        self.run_start[idx] = np.where(is_a, np.where(self.run_start[idx] >= 0,
                                                      self.run_start[idx], start), -1)
        self.pos[idx] = start + k
        self._check(idx[is_a])
        return ~is_a, start


def _naive_hitting(sampler, a, n, rng, size, step_cap):
    scan = _RunScanner(sampler, a, n)
    scan.start(rng, size)
    active = np.flatnonzero(~scan.done)
    while active.size:
        scan.step(rng, active)
        active = active[~scan.done[active]]
        over = active[scan.pos[active] > step_cap]
        if over.size:
            raise BudgetExceeded(
                f"{over.size} replicas passed {step_cap} letters without hitting",
                cap=step_cap, count=int(over.size))
    return scan.tau


def _run_law(c: np.ndarray, p_a: float, n: int):
    """``T(n)`` = P(a run opened by an ``a``-block reaches ``n`` letters) and the
    law of the length of a run that stops short, on ``1..n-1``."""
    q = c / p_a
    T = np.ones(n + 1)  # T[m] for m = 0..n; T(m) = 1 for m <= 0
    h = np.zeros(n + 1)  # exact run length l
    for m in range(1, n + 1):
        t = 0.0
        for k in np.nonzero(q)[0]:
            t += q[k] * (1.0 if k >= m else p_a * T[m - k])
        T[m] = t
    for ell in range(1, n):
        v = 0.0
        for k in np.nonzero(q)[0]:
            if k == ell:
                v += q[k] * (1.0 - p_a)
            elif k < ell:
                v += q[k] * p_a * h[ell - k]
        h[ell] = v
    return T[n], h[1:n]


def _skip_hitting(model, sampler, a, n, rng, size):
    """Exact sampler that jumps over the regenerative stretch after the first
    non-``a`` block starting at ``t >= 1``.

    From there the path alternates non-``a`` blocks with maximal ``a``-runs;
    each run independently reaches ``n`` letters with probability ``T(n)``, so
    the failed runs, the separating non-``a`` blocks and their lengths are
    drawn as counts instead of one block at a time.
    """
    p_a = model.pmf(a)
    scan = _RunScanner(sampler, a, n)
    scan.start(rng, size)
    stop_at = np.full(size, -1, dtype=np.int64)
    active = np.flatnonzero(~scan.done)
    while active.size:
        non_a, start = scan.step(rng, active)
        settle = non_a & (start >= 1)
        stop_at[active[settle]] = scan.pos[active[settle]]
        active = active[~settle & ~scan.done[active]]
    pending = np.flatnonzero(~scan.done)
    if pending.size:
        c = _step_weights(model, a)
        pi, fail = _run_law(c, p_a, n)
        m = pending.size
        K = rng.geometric(pi, m) - 1
        separators = K + rng.negative_binomial(K + 1, p_a)
        syms, lens, w = model.block_pairs()
        other = syms != a
        len_vals = lens[other]
        probs = w[other] / w[other].sum()
        gap = rng.multinomial(separators, probs) @ len_vals
        failed = 0
        if n > 1 and fail.sum() > 0:
            failed = rng.multinomial(K, fail / fail.sum()) @ np.arange(1, n)
        scan.tau[pending] = stop_at[pending] + gap + failed
    return scan.tau


def estimate_hitting_scaled(model: ModelSpec, a: int, n: int, n_replicas: int, seed: int,
                            method: str = "skip", step_cap: int = 10**8,
                            workers: int = 1) -> HittingSample:
    """Stationary hitting times of ``a^n`` rescaled by ``theta_1(n) mu(a^n)``.

    ``method="skip"`` is exact and fast for long patterns; ``"naive"`` scans
    block by block and raises ``BudgetExceeded`` past ``step_cap`` letters.
    """
    p_a = model.pmf(a)
    if not 0.0 < p_a < 1.0:
        raise DegeneratePattern(f"pattern {a}^{n} is degenerate (p_a = {p_a})")
    if n_replicas < 100:
        raise ValueError("n_replicas must be at least 100")
    sampler = BlockSampler(model)
    scale = theta1_cylinder(model, a, n) * mu_cylinder(model, a, n)

    def job(rng, size):
        if method == "naive":
            return _naive_hitting(sampler, a, n, rng, size, step_cap)
        if method == "skip":
            return _skip_hitting(model, sampler, a, n, rng, size)
        raise ValueError(f"unknown method {method!r}")

    tau = np.concatenate(_run_batches(job, n_replicas, seed, workers))
    return HittingSample(tau * scale, a, n, scale, method, seed)


def ks_exponential(sample) -> float:
    """Kolmogorov-Smirnov distance to the unit exponential."""
    values = sample.values if isinstance(sample, HittingSample) else np.asarray(sample)
    return float(stats.kstest(values, "expon").statistic)

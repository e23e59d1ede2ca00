"""Exact probabilities of finite-window events by enumerating block tilings.

The window ``[lo, hi]`` is covered by the stationary block containing ``lo``
(drawn with weight ``p_a q_a(k) / nu`` for each of its ``k`` offsets) followed
by fresh i.i.d. blocks.  Two enumeration strategies share one event model:

``dfs``
    Walks every tiling consistent with the per-time constraints, one block at
    a time.  Branches whose probability falls below ``PRUNE`` are not expanded;
    their mass is added to the upper bound.  Arbitrary predicates on the whole
    window are allowed.

``dp``
    Sums the same tilings grouped by the position of each block start.  Past
    and future are independent given a block start, so the sum over tilings
    after position ``t`` is shared by every prefix ending there.  Exact, and
    polynomial in the window length; used for conjunctive events.

Symbols above ``max_symbol`` (needed for infinite laws) are never enumerated;
their probability is carried in ``upper - lower``.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import OracleBudgetExceeded, RegenError
from .model import ModelSpec
from .observables import Cylinder, Exceedance

PRUNE = 1e-15
DEFAULT_BUDGET = 50_000_000
_BIG = 1 << 40

_OPS = {"eq": operator.eq, "ne": operator.ne, "gt": operator.gt, "le": operator.le}


@dataclass(frozen=True)
class Cond:
    """Constraint ``X_t <op> value`` on a single letter."""

    op: str
    value: int

    def allows(self, symbols):
        return _OPS[self.op](symbols, self.value)


def eq(a):
    return Cond("eq", a)


def ne(a):
    return Cond("ne", a)


def gt(a):
    return Cond("gt", a)


def le(a):
    return Cond("le", a)


@dataclass(frozen=True)
class WindowEvent:
    """Conjunction of letter constraints and regeneration markers on a window.

    ``symbols`` maps a time to the constraints on that letter,
    ``regenerations`` maps a time to whether a block must (``True``) or must
    not (``False``) start there.  ``predicate(x, regen, lo)`` optionally adds
    an arbitrary condition on the whole window (``x[i]`` is ``X_{lo+i}``); it
    forces the ``dfs`` strategy.
    """

    symbols: Mapping[int, tuple] = field(default_factory=dict)
    regenerations: Mapping[int, bool] = field(default_factory=dict)
    predicate: Callable | None = None
    window: tuple[int, int] | None = None
    impossible: bool = False

    @classmethod
    def of(cls, symbols=None, regenerations=None, predicate=None, window=None):
        norm = {}
        for t, c in (symbols or {}).items():
            norm[int(t)] = (c,) if isinstance(c, Cond) else tuple(c)
        return cls(norm, dict(regenerations or {}), predicate, window)

    def __and__(self, other: "WindowEvent") -> "WindowEvent":
        syms = dict(self.symbols)
        for t, cs in other.symbols.items():
            syms[t] = syms.get(t, ()) + tuple(cs)
        regen = dict(self.regenerations)
        impossible = self.impossible or other.impossible
        for t, v in other.regenerations.items():
            if regen.get(t, v) != v:
                impossible = True
            regen[t] = v
        preds = [p for p in (self.predicate, other.predicate) if p is not None]
        if len(preds) == 2:
            p1, p2 = preds

            def pred(x, r, lo):
                return p1(x, r, lo) and p2(x, r, lo)
        else:
            pred = preds[0] if preds else None
        windows = [w for w in (self.window, other.window) if w is not None]
        window = (min(w[0] for w in windows), max(w[1] for w in windows)) if windows else None
        return WindowEvent(syms, regen, pred, window, impossible)

    def span(self) -> tuple[int, int]:
        times = list(self.symbols) + list(self.regenerations)
        if self.window is not None:
            times.extend(self.window)
        if not times:
            raise RegenError("event constrains no time")
        return min(times), max(times)


def run(cond: Cond, start: int, stop: int) -> WindowEvent:
    """``cond`` holds at every time in ``[start, stop)``."""
    return WindowEvent.of({t: cond for t in range(start, stop)})


@dataclass(frozen=True)
class ProbabilityBounds:
    lower: float
    upper: float
    enumerated_mass: float = 1.0

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def mid(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= value <= self.upper + tol


# ---------------------------------------------------------------------------
# enumeration engine
# ---------------------------------------------------------------------------


class _Tilings:
    """Block table of one model, reused across queries."""

    def __init__(self, model: ModelSpec, max_symbol: int | None = None):
        law = model.symbol_law
        if model.finite and (max_symbol is None or max_symbol >= law.max_symbol):
            symbols, probs = law.table()
            self.dropped_step = 0.0
            self.dropped_first = 0.0
        else:
            if max_symbol is None:
                raise RegenError("infinite symbol law: pass max_symbol to enumerate")
            symbols = np.arange(1, max_symbol + 1)
            probs = np.array([law.pmf(int(s)) for s in symbols])
            self.dropped_step = law.tail(max_symbol)
            self.dropped_first = model.block_moment_tail(max_symbol, 1) / model.nu
        sym, length, w = [], [], []
        for s, p in zip(symbols.tolist(), probs.tolist()):
            if p == 0.0:
                continue
            ks, qs = model.block_family.pmf(s)
            sym.extend([s] * len(ks))
            length.extend(ks.tolist())
            w.extend((p * qs).tolist())
        self.usyms = np.unique(sym)
        self.sym = np.array(sym, dtype=np.int64)
        self.sym_index = np.searchsorted(self.usyms, self.sym)
        self.length = np.array(length, dtype=np.int64)
        self.weight = np.array(w)
        self.nu = model.nu
        self.max_length = int(self.length.max())

    # -- shared preprocessing -------------------------------------------------

    def _prepare(self, event: WindowEvent):
        lo, hi = event.span()
        width = hi - lo + 1
        ok = np.ones((len(self.usyms), width), dtype=bool)
        for t, conds in event.symbols.items():
            for c in conds:
                ok[:, t - lo] &= c.allows(self.usyms)
        okrun = np.empty((len(self.usyms), width + 1), dtype=np.int64)
        okrun[:, width] = _BIG
        for j in range(width - 1, -1, -1):
            okrun[:, j] = np.where(ok[:, j], okrun[:, j + 1] + 1, 0)
        forced = sorted(t - lo for t, v in event.regenerations.items() if v)
        forbidden = {t - lo for t, v in event.regenerations.items() if not v}
        next_forced = np.full(width + 1, _BIG, dtype=np.int64)
        nxt = _BIG
        fi = len(forced) - 1
        for j in range(width, -1, -1):
            while fi >= 0 and forced[fi] > j:
                nxt = forced[fi]
                fi -= 1
            next_forced[j] = nxt
        return lo, width, okrun, next_forced, set(forced), forbidden

    # -- dynamic programme over block starts ------------------------------------

    def dp(self, event: WindowEvent, budget: int) -> ProbabilityBounds:
        if event.impossible:
            return ProbabilityBounds(0.0, 0.0, 1.0)
        lo, width, okrun, nf, forced, forbidden = self._prepare(event)
        cost = width * len(self.weight) + int(self.length.sum())
        if cost > budget:
            raise OracleBudgetExceeded(
                f"dp needs ~{cost} operations, budget {budget}", ProbabilityBounds(0.0, 1.0, 0.0)
            )
        size = width + self.max_length + 1
        f_lo = np.ones(size)
        f_hi = np.ones(size)
        k, w, si = self.length, self.weight, self.sym_index
        for j in range(width - 1, 0, -1):
            if j in forbidden:
                f_lo[j] = f_hi[j] = 0.0
                continue
            valid = (okrun[si, j] >= k) & (nf[j] >= j + k)
            nxt = j + k[valid]
            f_lo[j] = w[valid] @ f_lo[nxt]
            f_hi[j] = min(1.0, w[valid] @ f_hi[nxt] + self.dropped_step)
        # stationary first block: residual length l in 1..k, block starts at lo iff l == k
        lmax = np.minimum(np.minimum(k, okrun[si, 0]), nf[0])
        cum_lo = np.concatenate([[0.0], np.cumsum(f_lo[1:])])
        cum_hi = np.concatenate([[0.0], np.cumsum(f_hi[1:])])
        if 0 in forced:
            full = lmax >= k
            c_lo = np.where(full, f_lo[k], 0.0)
            c_hi = np.where(full, f_hi[k], 0.0)
        else:
            top = np.minimum(lmax, k - 1) if 0 in forbidden else lmax
            c_lo = cum_lo[top]
            c_hi = cum_hi[top]
        total_lo = float(w @ c_lo) / self.nu
        total_hi = min(1.0, float(w @ c_hi) / self.nu + self.dropped_first)
        return ProbabilityBounds(total_lo, max(total_hi, total_lo), 1.0 - (total_hi - total_lo))

    # -- explicit tiling walk -------------------------------------------------

    def dfs(self, event: WindowEvent, budget: int, prune: float = PRUNE) -> ProbabilityBounds:
        if event.impossible:
            return ProbabilityBounds(0.0, 0.0, 1.0)
        lo, width, okrun, nf, forced, forbidden = self._prepare(event)
        pred = event.predicate
        x = np.zeros(width, dtype=np.int64)
        r = np.zeros(width, dtype=bool)
        acc = {"hit": 0.0, "unknown": 0.0, "seen": 0.0, "nodes": 0}
        pairs = list(zip(self.sym.tolist(), self.length.tolist(), self.weight.tolist(),
                         self.sym_index.tolist()))

        def spend():
            acc["nodes"] += 1
            if acc["nodes"] > budget:
                unseen = max(0.0, 1.0 - acc["seen"])
                raise OracleBudgetExceeded(
                    f"enumeration exceeded {budget} nodes",
                    ProbabilityBounds(acc["hit"], min(1.0, acc["hit"] + acc["unknown"] + unseen),
                                      acc["seen"] - acc["unknown"]),
                )

        def settle(j, pr):
            # the current tiling covers [0, j); decide or extend
            if j >= width:
                if pred is None or pred(x, r, lo):
                    acc["hit"] += pr
                acc["seen"] += pr
            else:
                extend(j, pr)

        def extend(j, prob):
            if j in forbidden:
                acc["seen"] += prob
                return
            if self.dropped_step:
                acc["unknown"] += prob * self.dropped_step
                acc["seen"] += prob * self.dropped_step
            for s, k, w, i in pairs:
                spend()
                pr = prob * w
                if okrun[i, j] < k or nf[j] < j + k:
                    acc["seen"] += pr
                    continue
                if pr < prune:
                    acc["unknown"] += pr
                    acc["seen"] += pr
                    continue
                stop = min(j + k, width)
                x[j:stop] = s
                r[j] = True
                r[j + 1:stop] = False
                settle(j + k, pr)

        if self.dropped_first:
            acc["unknown"] += self.dropped_first
            acc["seen"] += self.dropped_first
        for s, k, w, i in pairs:
            for ell in range(1, k + 1):
                spend()
                pr = w / self.nu
                starts_here = ell == k
                if (0 in forced and not starts_here) or (0 in forbidden and starts_here) \
                        or okrun[i, 0] < ell or nf[0] < ell:
                    acc["seen"] += pr
                    continue
                if pr < prune:
                    acc["unknown"] += pr
                    acc["seen"] += pr
                    continue
                stop = min(ell, width)
                x[:stop] = s
                r[0] = starts_here
                r[1:stop] = False
                settle(ell, pr)
        upper = min(1.0, acc["hit"] + acc["unknown"])
        return ProbabilityBounds(acc["hit"], upper, 1.0 - acc["unknown"])


# ---------------------------------------------------------------------------
# public queries
# ---------------------------------------------------------------------------


def exact_window_probability(model: ModelSpec, event: WindowEvent, budget: int = DEFAULT_BUDGET,
                             max_symbol: int | None = None, method: str = "auto",
                             _tilings: _Tilings | None = None) -> ProbabilityBounds:
    """Bounds ``[lower, upper]`` on ``P(event)`` under the stationary law.

    ``method`` is ``"dp"``, ``"dfs"`` or ``"auto"`` (``dfs`` only when the
    event carries a predicate).
    """
    tilings = _tilings or _Tilings(model, max_symbol)
    if method == "auto":
        method = "dfs" if event.predicate is not None else "dp"
    if method == "dp":
        if event.predicate is not None:
            raise RegenError("the dp strategy cannot evaluate window predicates")
        return tilings.dp(event, budget)
    if method == "dfs":
        return tilings.dfs(event, budget)
    raise ValueError(f"unknown method {method!r}")


def ratio_bounds(num: ProbabilityBounds, den: ProbabilityBounds) -> ProbabilityBounds:
    if den.lower <= 0.0:
        raise RegenError("conditioning event has zero (or unresolved) probability")
    lower = num.lower / den.upper
    upper = min(1.0, num.upper / den.lower)
    return ProbabilityBounds(lower, max(lower, upper), min(num.enumerated_mass, den.enumerated_mass))


def exact_conditional_probability(model: ModelSpec, event: WindowEvent, given: WindowEvent,
                                  budget: int = DEFAULT_BUDGET, max_symbol: int | None = None,
                                  method: str = "auto", _tilings=None) -> ProbabilityBounds:
    """Bounds on ``P(event | given)`` by interval division."""
    tilings = _tilings or _Tilings(model, max_symbol)
    num = exact_window_probability(model, event & given, budget, method=method, _tilings=tilings)
    den = exact_window_probability(model, given, budget, method=method, _tilings=tilings)
    return ratio_bounds(num, den)


def good_cond(obs) -> Cond:
    return gt(obs.level) if isinstance(obs, Exceedance) else eq(obs.symbol)


def bad_cond(obs) -> Cond:
    return le(obs.level) if isinstance(obs, Exceedance) else ne(obs.symbol)


def occurrence(obs, start: int = 0) -> WindowEvent:
    """``U`` shifted to ``start``."""
    return run(good_cond(obs), start, start + obs.width)


def entering(obs) -> WindowEvent:
    """``E = {X_{-1} bad} & U``: an occurrence that starts its cluster."""
    return WindowEvent.of({-1: bad_cond(obs)}) & occurrence(obs)


def cluster_at_least(obs, k: int) -> WindowEvent:
    """``N >= k``: ``k`` consecutive occurrences starting at time 0."""
    return run(good_cond(obs), 0, obs.width + k - 1)


def conditioning_event(obs, conditioning: str) -> WindowEvent:
    if conditioning == "entering":
        return entering(obs)
    if conditioning == "sojourn":
        return occurrence(obs)
    if conditioning == "regeneration":
        return WindowEvent.of(regenerations={0: True})
    raise ValueError(f"unknown conditioning {conditioning!r}")


def exact_theta_q(model: ModelSpec, observable, q: int, budget: int = DEFAULT_BUDGET,
                  max_symbol: int | None = None) -> ProbabilityBounds:
    """``P(no further occurrence at times 1..q | U)`` by enumeration.

    A level with no mass above it returns the conventional value 1.
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    if not observable.feasible(model):
        return ProbabilityBounds(1.0, 1.0, 1.0)
    tilings = _Tilings(model, max_symbol)
    given = occurrence(observable)
    if isinstance(observable, Exceedance):
        event = run(le(observable.level), 1, q + 1)
    elif q <= observable.length:
        # given U, an occurrence starting in 1..q must cover time n
        event = WindowEvent.of({observable.length: ne(observable.symbol)})
    else:
        a, n = observable.symbol, observable.length

        def no_return(x, r, lo):
            hits = x == a
            for j in range(1, q + 1):
                if hits[j - lo:j - lo + n].all():
                    return False
            return True

        event = WindowEvent(predicate=no_return, window=(0, q + n - 1))
    return exact_conditional_probability(model, event, given, budget, _tilings=tilings)


@dataclass(frozen=True)
class ClusterBounds:
    """Enumerated law of the cluster size ``N`` under one conditioning."""

    conditioning: str
    tail: list  # ProbabilityBounds for P(N >= k), k = 1..k_max
    mean: ProbabilityBounds
    second_moment: ProbabilityBounds

    def tail_value(self, k: int) -> ProbabilityBounds:
        return self.tail[k - 1]


def _continuation_tail(k_top: int, ratio: float, step: int):
    """Bounds on the sums of ``P(N >= k)`` and ``(2k - 1) P(N >= k)`` over ``k > k_top``.

    Uses ``P(N >= m + step) <= ratio * P(N >= m)``: within ``step`` letters a
    fresh block starts and it must carry a good symbol.  Factors multiply
    ``P(N >= k_top)``.
    """
    if ratio >= 1.0:
        return math.inf, math.inf
    B = step
    g = ratio / (1.0 - ratio)
    mean = (B - 1) + B * g
    # sum_{j>=1} (2 k_top - 1 + 2 j) ratio**floor(j / B)
    head = sum(2 * k_top - 1 + 2 * j for j in range(1, B))
    per_group = B * (2 * k_top - 1) + B * (B - 1)
    second = head + per_group * g + 2 * B * B * ratio / (1.0 - ratio) ** 2
    return mean, second


def exact_cluster_moments(model: ModelSpec, observable, k_max: int, conditioning: str = "entering",
                          budget: int = DEFAULT_BUDGET) -> ClusterBounds:
    """Exact ``P(N >= k)`` for ``k <= k_max`` plus bracketed first two moments.

    ``conditioning`` is ``"entering"`` (cluster start), ``"sojourn"`` (any
    occurrence) or ``"regeneration"`` (a block starts at time 0).
    Requires a finite-support model.
    """
    if not model.finite:
        raise RegenError("cluster enumeration needs a finite-support model; truncate first")
    tilings = _Tilings(model)
    given = conditioning_event(observable, conditioning)
    den = exact_window_probability(model, given, budget, _tilings=tilings)
    tails = []
    for k in range(1, k_max + 1):
        num = exact_window_probability(model, cluster_at_least(observable, k) & given, budget,
                                       _tilings=tilings)
        tails.append(ratio_bounds(num, den))
    rho = observable.symbol_mass(model)
    extra_mean, extra_second = _continuation_tail(k_max, rho, tilings.max_length + 1)
    last = tails[-1].upper
    m_lo = math.fsum(b.lower for b in tails)
    m_hi = math.fsum(b.upper for b in tails) + last * extra_mean
    s_lo = math.fsum((2 * k - 1) * b.lower for k, b in enumerate(tails, 1))
    s_hi = math.fsum((2 * k - 1) * b.upper for k, b in enumerate(tails, 1)) + last * extra_second
    return ClusterBounds(conditioning, tails, ProbabilityBounds(m_lo, m_hi, 1.0),
                         ProbabilityBounds(s_lo, s_hi, 1.0))


def exact_entering_block_moments(model: ModelSpec, level: int, budget: int = DEFAULT_BUDGET):
    """Bounds on ``E_E(F)`` and ``E_E(F^2)``, ``F`` the length of the block entered at a cluster start."""
    if not model.finite:
        raise RegenError("needs a finite-support model; truncate first")
    obs = Exceedance(level)
    tilings = _Tilings(model)
    given = entering(obs)
    den = exact_window_probability(model, given, budget, _tilings=tilings)
    m_lo = m_hi = s_lo = s_hi = 0.0
    for k in range(1, tilings.max_length + 1):
        no_start = WindowEvent.of(regenerations={t: False for t in range(1, k)}, window=(0, k - 1))
        b = ratio_bounds(exact_window_probability(model, no_start & given, budget, _tilings=tilings),
                         den)
        m_lo += b.lower
        m_hi += b.upper
        s_lo += (2 * k - 1) * b.lower
        s_hi += (2 * k - 1) * b.upper
    return ProbabilityBounds(m_lo, m_hi, 1.0), ProbabilityBounds(s_lo, s_hi, 1.0)

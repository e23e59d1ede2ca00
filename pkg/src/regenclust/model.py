"""Symbol laws, block-length families and the exact stationary quantities.

A process is built from i.i.d. pairs ``(Z, xi)``: the symbol ``Z`` has law
``p`` and, given ``Z = a``, the block length ``xi`` has law ``q_a``.  The
symbol is written ``xi`` times and blocks are concatenated.  Every block start
is a regeneration.

Notation used throughout the package:

``e_a``  symbol-law tail ``sum_{j>a} p_j``
``m_a``  ``sum_{j>a} p_j E(q_j)``   (so ``g_a = m_a / nu``)
``m2_a`` ``sum_{j>a} p_j E(q_j^2)``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DivergentMean, InfiniteMoment, RegenError

PROB_ATOL = 1e-12

# Geometric laws are materialised up to the symbol whose tail drops below this
# mass; beyond it a double-precision uniform cannot resolve the difference.
SAMPLING_TAIL = 2.0**-60


# ---------------------------------------------------------------------------
# symbol laws
# ---------------------------------------------------------------------------


class SymbolLaw:
    """Distribution ``p`` of the symbol drawn at each regeneration."""

    max_symbol: int | None = None

    def pmf(self, a: int) -> float:
        raise NotImplementedError

    def tail(self, a: int) -> float:
        """``e_a = P(Z > a)``."""
        return self.partial_moment(a, 0)

    def partial_moment(self, a: int, power: int) -> float:
        """``sum_{j>a} j**power * p_j`` for ``power`` in 0, 1, 2."""
        raise NotImplementedError

    def table(self) -> tuple[np.ndarray, np.ndarray]:
        """Finite ``(symbols, probabilities)`` arrays used for enumeration and sampling."""
        raise NotImplementedError

    def truncate(self, max_symbol: int) -> "FiniteTable":
        """Restrict to ``{1..max_symbol}`` and renormalise."""
        symbols, probs = self.table()
        keep = symbols <= max_symbol
        if not keep.any():
            raise RegenError(f"no mass at or below symbol {max_symbol}")
        probs = probs[keep] / math.fsum(probs[keep])
        return FiniteTable(dict(zip(symbols[keep].tolist(), probs.tolist())))


@dataclass(frozen=True, init=False)
class FiniteTable(SymbolLaw):
    """Finitely supported symbol law given as ``{symbol: probability}``."""

    probabilities: Mapping[int, float]
    _symbols: np.ndarray = field(repr=False, compare=False)
    _probs: np.ndarray = field(repr=False, compare=False)

    def __init__(self, probabilities: Mapping[int, float]):
        items = sorted((int(a), float(p)) for a, p in probabilities.items() if p != 0)
        if not items:
            raise RegenError("symbol law has no mass")
        for a, p in items:
            if a < 1:
                raise RegenError(f"symbols must be positive integers, got {a}")
            if p < 0:
                raise RegenError(f"negative probability for symbol {a}")
        total = math.fsum(p for _, p in items)
        if abs(total - 1.0) > PROB_ATOL:
            raise RegenError(f"symbol probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "probabilities", dict(items))
        object.__setattr__(self, "_symbols", np.array([a for a, _ in items], dtype=np.int64))
        object.__setattr__(self, "_probs", np.array([p for _, p in items]))

    @property
    def max_symbol(self) -> int:
        return int(self._symbols[-1])

    def pmf(self, a):
        return self.probabilities.get(int(a), 0.0)

    def partial_moment(self, a, power):
        mask = self._symbols > a
        # fsum is correctly rounded, so term ordering does not matter
        return math.fsum((self._symbols[mask].astype(float) ** power * self._probs[mask]).tolist())

    def table(self):
        return self._symbols.copy(), self._probs.copy()


@dataclass(frozen=True)
class Geometric(SymbolLaw):
    """``p_a = (1 - ratio) * ratio**(a - 1)`` on the positive integers."""

    ratio: float

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise RegenError(f"geometric ratio must lie in (0, 1), got {self.ratio}")

    def pmf(self, a):
        a = int(a)
        return (1.0 - self.ratio) * self.ratio ** (a - 1) if a >= 1 else 0.0

    def partial_moment(self, a, power):
        rho = self.ratio
        a = max(int(a), 0)
        head = rho**a
        # given Z > a, Z - a is geometric on {1, 2, ...} with success 1 - rho
        mean = a + 1.0 / (1.0 - rho)
        if power == 0:
            return head
        if power == 1:
            return head * mean
        if power == 2:
            return head * (mean**2 + rho / (1.0 - rho) ** 2)
        raise ValueError("power must be 0, 1 or 2")

    def table(self):
        rho = self.ratio
        top = max(1, math.ceil(math.log(SAMPLING_TAIL) / math.log(rho)))
        symbols = np.arange(1, top + 1, dtype=np.int64)
        probs = (1.0 - rho) * rho ** (symbols - 1.0)
        return symbols, probs / probs.sum()


# ---------------------------------------------------------------------------
# block-length families
# ---------------------------------------------------------------------------


class BlockLawFamily:
    """Assigns a block-length law ``q_a`` to every symbol ``a``."""

    name = "abstract"
    # E(q_a**k) = c0 + c1*a + c2*a**2 for k = 1, 2 (None when not polynomial)
    moment_coefficients: dict[int, tuple[float, float, float]] | None = None

    def pmf(self, a: int) -> tuple[np.ndarray, np.ndarray]:
        """``(lengths, probabilities)`` of ``q_a`` with zero entries removed."""
        raise NotImplementedError

    def moment(self, a: int, power: int) -> float:
        if self.moment_coefficients is not None:
            c0, c1, c2 = self.moment_coefficients[power]
            return c0 + c1 * a + c2 * a * a
        lengths, probs = self.pmf(a)
        return math.fsum((lengths.astype(float) ** power * probs).tolist())

    def mean(self, a: int) -> float:
        return self.moment(a, 1)

    def second_moment(self, a: int) -> float:
        return self.moment(a, 2)

    def max_length(self, a: int) -> int:
        return int(self.pmf(a)[0].max())


@dataclass(frozen=True)
class IID(BlockLawFamily):
    """Every block has length one: the i.i.d. sequence."""

    name = "iid"
    moment_coefficients = {1: (1.0, 0.0, 0.0), 2: (1.0, 0.0, 0.0)}

    def pmf(self, a):
        return np.array([1]), np.array([1.0])


@dataclass(frozen=True)
class Smith(BlockLawFamily):
    """``q_a(1) = (a-1)/a`` and ``q_a(a+1) = 1/a``; mean 2 for every symbol."""

    name = "smith"
    moment_coefficients = {1: (2.0, 0.0, 0.0), 2: (3.0, 1.0, 0.0)}

    def pmf(self, a):
        a = int(a)
        if a == 1:
            return np.array([2]), np.array([1.0])
        return np.array([1, a + 1]), np.array([(a - 1) / a, 1.0 / a])


@dataclass(frozen=True)
class Block(BlockLawFamily):
    """Symbol ``a`` is always written exactly ``a`` times."""

    name = "block"
    moment_coefficients = {1: (0.0, 1.0, 0.0), 2: (0.0, 0.0, 1.0)}

    def pmf(self, a):
        return np.array([int(a)]), np.array([1.0])


@dataclass(frozen=True, init=False)
class Table(BlockLawFamily):
    """Arbitrary finite length pmf per symbol: ``{symbol: {length: prob}}``."""

    pmfs: Mapping[int, Mapping[int, float]]
    name = "table"

    def __init__(self, pmfs: Mapping[int, Mapping[int, float]]):
        clean = {}
        for a, law in pmfs.items():
            items = sorted((int(k), float(p)) for k, p in law.items() if p != 0)
            if not items or any(k < 1 or p < 0 for k, p in items):
                raise RegenError(f"invalid block-length pmf for symbol {a}")
            total = math.fsum(p for _, p in items)
            if abs(total - 1.0) > PROB_ATOL:
                raise RegenError(f"block-length pmf for symbol {a} sums to {total!r}")
            clean[int(a)] = dict(items)
        object.__setattr__(self, "pmfs", clean)

    def pmf(self, a):
        law = self.pmfs.get(int(a))
        if law is None:
            raise RegenError(f"no block-length law for symbol {a}")
        return np.array(list(law.keys())), np.array(list(law.values()))


# ---------------------------------------------------------------------------
# the model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelSpec:
    """A symbol law together with its block-length family."""

    symbol_law: SymbolLaw
    block_family: BlockLawFamily

    def __post_init__(self):
        fam = self.block_family
        if fam.moment_coefficients is None:
            if self.symbol_law.max_symbol is None:
                raise RegenError("a Table block family needs a finite symbol law")
            for a in self.symbol_law.table()[0]:
                fam.pmf(int(a))
        if not math.isfinite(self.nu):
            raise DivergentMean("mean block length is not finite")

    @property
    def finite(self) -> bool:
        return self.symbol_law.max_symbol is not None

    @property
    def nu(self) -> float:
        return self.block_moment_tail(0, 1)

    def block_moment_tail(self, a: int, power: int) -> float:
        """``sum_{j>a} p_j E(q_j**power)`` (``power`` 0, 1 or 2)."""
        if power == 0:
            return self.symbol_law.tail(a)
        coeffs = self.block_family.moment_coefficients
        law = self.symbol_law
        if coeffs is not None:
            c0, c1, c2 = coeffs[power]
            terms = [c * law.partial_moment(a, i) for i, c in enumerate((c0, c1, c2)) if c]
            return math.fsum(terms) if terms else 0.0
        symbols, probs = law.table()
        mask = symbols > a
        return math.fsum(
            p * self.block_family.moment(int(s), power) for s, p in zip(symbols[mask], probs[mask])
        )

    def pmf(self, a: int) -> float:
        return self.symbol_law.pmf(a)

    def block_pairs(self):
        """All ``(symbol, length, p_symbol * q_symbol(length))`` triples as arrays.

        Geometric laws are cut where the remaining mass is below
        ``SAMPLING_TAIL`` and renormalised; finite laws are exact.
        """
        symbols, probs = self.symbol_law.table()
        out_s, out_k, out_w = [], [], []
        for s, p in zip(symbols.tolist(), probs.tolist()):
            lengths, q = self.block_family.pmf(s)
            out_s.append(np.full(len(lengths), s, dtype=np.int64))
            out_k.append(lengths.astype(np.int64))
            out_w.append(p * q)
        return np.concatenate(out_s), np.concatenate(out_k), np.concatenate(out_w)

    def truncate(self, max_symbol: int) -> "ModelSpec":
        return ModelSpec(self.symbol_law.truncate(max_symbol), self.block_family)


def iid(law: SymbolLaw) -> ModelSpec:
    return ModelSpec(law, IID())


def smith(law: SymbolLaw) -> ModelSpec:
    return ModelSpec(law, Smith())


def block(law: SymbolLaw) -> ModelSpec:
    return ModelSpec(law, Block())


def table(law: SymbolLaw, pmfs: Mapping[int, Mapping[int, float]]) -> ModelSpec:
    return ModelSpec(law, Table(pmfs))


def finite(probabilities) -> FiniteTable:
    """``FiniteTable`` from a mapping, or from a sequence read as symbols 1, 2, ..."""
    if not isinstance(probabilities, Mapping):
        probabilities = {i + 1: p for i, p in enumerate(probabilities)}
    return FiniteTable(probabilities)


# ---------------------------------------------------------------------------
# stationary quantities
# ---------------------------------------------------------------------------


def nu(model: ModelSpec) -> float:
    """Mean block length ``sum_a p_a E(q_a)``."""
    return model.nu


def regen_prob(model: ModelSpec) -> float:
    """Stationary probability of a regeneration at a fixed time (Kac)."""
    return 1.0 / model.nu


def stationary_marginal(model: ModelSpec, a: int) -> float:
    """``mu(a) = p_a E(q_a) / nu``, the length-biased one-letter marginal."""
    p = model.pmf(a)
    if p == 0.0:
        return 0.0
    return p * model.block_family.mean(a) / model.nu


def tail_e(model: ModelSpec, a: int) -> float:
    """``e_a = sum_{j>a} p_j``."""
    return model.symbol_law.tail(a)


def tail_g(model: ModelSpec, a: int) -> float:
    """``g_a = P(X_0 > a) = m_a / nu``."""
    return model.block_moment_tail(a, 1) / model.nu


def partial_moments(model: ModelSpec, a: int) -> tuple[float, float, float]:
    """``(e_a, m_a, m2_a)``; raises ``InfiniteMoment`` if ``m2_a`` diverges."""
    e = model.block_moment_tail(a, 0)
    m = model.block_moment_tail(a, 1)
    m2 = model.block_moment_tail(a, 2)
    if not math.isfinite(m2):
        raise InfiniteMoment(f"second block moment above level {a} diverges")
    return e, m, m2

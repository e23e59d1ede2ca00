"""Observables whose clustering is studied: exceedances and constant cylinders."""

from __future__ import annotations

from dataclasses import dataclass

from .model import ModelSpec


@dataclass(frozen=True)
class Exceedance:
    """``U = {X_0 > level}``."""

    level: int
    period: int = 1

    #: number of letters the event inspects
    width = 1

    def good(self, symbol: int) -> bool:
        return symbol > self.level

    def symbol_mass(self, model: ModelSpec) -> float:
        """Probability that the symbol drawn at a regeneration is good."""
        return model.symbol_law.tail(self.level)

    def feasible(self, model: ModelSpec) -> bool:
        return self.symbol_mass(model) > 0.0


@dataclass(frozen=True)
class Cylinder:
    """``U = {X_0 = ... = X_{length-1} = symbol}``."""

    symbol: int
    length: int
    period: int = 1

    def __post_init__(self):
        if self.length < 1 or self.symbol < 1:
            raise ValueError("cylinder needs a positive symbol and length")

    @property
    def width(self) -> int:
        return self.length

    def good(self, symbol: int) -> bool:
        return symbol == self.symbol

    def symbol_mass(self, model: ModelSpec) -> float:
        return model.pmf(self.symbol)

    def feasible(self, model: ModelSpec) -> bool:
        return self.symbol_mass(model) > 0.0

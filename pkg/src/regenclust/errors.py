"""Exception types raised by the package."""


class RegenError(ValueError):
    """Base class for precondition failures on models and observables."""


class DivergentMean(RegenError):
    """The mean block length (nu) is not finite."""


class InfiniteMoment(RegenError):
    """A moment needed by a formula diverges."""


class DegenerateLevel(RegenError):
    """Exceedance level for which the requested index is undefined."""


class DegenerateSymbol(RegenError):
    """Symbol for which the characteristic root is not well defined."""


class DegeneratePattern(RegenError):
    """Cylinder pattern of zero (or full) stationary measure."""


class NoConditioningEvents(RuntimeError):
    """A Monte Carlo run never observed its conditioning event."""


class BudgetExceeded(RuntimeError):
    """A simulated replica ran past the configured step cap."""

    def __init__(self, message, cap=None, count=0):
        super().__init__(message)
        self.cap = cap
        self.count = count


class OracleBudgetExceeded(RuntimeError):
    """Enumeration stopped early; ``bounds`` holds the partial result."""

    def __init__(self, message, bounds=None):
        super().__init__(message)
        self.bounds = bounds

"""Exception and warning types shared across the package."""


class EVFlexError(Exception):
    """Base class for all evflex errors."""


class EnergyOutOfRange(EVFlexError):
    """Requested energy is negative or exceeds what the horizon can deliver."""


class DimensionMismatch(EVFlexError):
    """Vector/profile length does not match the expected horizon."""


class NegativeEntry(EVFlexError):
    """A profile entry is negative beyond tolerance."""


class NotMonotone(EVFlexError):
    """An input vector was required to be sorted non-increasing but is not."""


class NegativeBudget(EVFlexError):
    """A transport budget must be non-negative."""


class DomainError(EVFlexError):
    """Argument outside the mathematical domain of the operation."""


class BudgetInfeasible(EVFlexError):
    """The requested ball radius is smaller than the unavoidable projection cost."""

    def __init__(self, epsilon: float, projection_cost: float):
        self.epsilon = epsilon
        self.projection_cost = projection_cost
        super().__init__(
            f"epsilon={epsilon!r} is below the projection cost {projection_cost!r}"
        )


class InsufficientData(EVFlexError):
    """Not enough usable points to fit the concentration constants."""


class ParseError(EVFlexError):
    """Scenario or result file is unreadable or malformed. CLI exit code 2."""


class ValidationError(EVFlexError):
    """Scenario content breaks a model invariant. CLI exit code 3."""


class RangeWarning(UserWarning):
    """Emitted when a ball radius leaves the validity range of the tail bound."""

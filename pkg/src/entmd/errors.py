"""Exception types shared across the package."""


class EntmdError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(EntmdError, ValueError):
    """Operands have incompatible shapes."""


class DomainError(EntmdError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class InfiniteDivergence(EntmdError, ValueError):
    """The Bregman divergence is +inf for the given pair (x_i > 0 where y_i = 0)."""


class BreakdownError(EntmdError, ArithmeticError):
    """An iterate became non-finite or a certified inequality failed numerically."""


class ConvergenceError(EntmdError, RuntimeError):
    """An iterative procedure exhausted its budget before reaching tolerance."""

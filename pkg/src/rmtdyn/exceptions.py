"""Exception types raised by rmtdyn."""


class DomainError(ValueError):
    """Argument outside the domain of a function (pole, non-positive input)."""


class ConvergenceError(RuntimeError):
    """A numerical procedure did not reach its tolerance."""


class ConditioningError(RuntimeError):
    """Requested computation is outside the double-precision safe zone."""

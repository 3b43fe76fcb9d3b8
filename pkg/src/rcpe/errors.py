"""Exception types raised across the package."""


class InvalidSpecError(ValueError):
    """An action-class specification or oracle input is malformed."""


class DimensionError(ValueError):
    """Vector lengths disagree."""


class InsufficientBudgetError(ValueError):
    """The sampling budget is too small for the requested algorithm."""


class InfeasibleError(RuntimeError):
    """An optimization problem has no feasible solution."""


class DegenerateInstanceError(ValueError):
    """The best action is not unique."""


class DegenerateClassError(ValueError):
    """Every pair of candidate actions is identical."""


class MetricsUnavailableError(RuntimeError):
    """The action class is too large to enumerate."""

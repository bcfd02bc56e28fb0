"""Exception taxonomy shared across the package."""


class GraphFormatError(ValueError):
    """The edge-list file itself is malformed (a file problem)."""


class GraphValidationError(ValueError):
    """The parsed data violates the graph model (a model problem)."""


class PreconditionError(ValueError):
    """An operation was called outside its stated domain."""


class ConvergenceError(RuntimeError):
    """An iterative solver did not reach its tolerance within its cap."""

    def __init__(self, message: str, best_residual: float | None = None):
        super().__init__(message)
        self.best_residual = best_residual

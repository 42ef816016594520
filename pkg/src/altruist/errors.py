"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class SingularSystemError(RuntimeError):
    """The normal-equation system is singular and inconsistent."""


class ConvergenceError(RuntimeError):
    """An iterative linear solve failed to reach its tolerance."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual

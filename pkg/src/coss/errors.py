"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


class NumericalError(RuntimeError):
    """Raised when an iterative or factorization routine fails numerically.

    ``iterations`` carries the iteration count at failure when the
    underlying routine exposes one, else -1.
    """

    def __init__(self, message, iterations=-1):
        super().__init__(message)
        self.iterations = iterations

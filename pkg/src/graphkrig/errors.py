"""Exception types shared across the package."""


class GraphKrigError(Exception):
    """Base class for errors raised by this package."""


class ConvergenceError(GraphKrigError):
    """An iterative solver failed to reach its tolerance."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class NotPositiveDefiniteError(GraphKrigError):
    """A matrix required to be positive definite is not."""

    def __init__(self, message: str, min_eigenvalue: float | None = None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class DataFormatError(GraphKrigError):
    """An input file does not match the documented on-disk format."""

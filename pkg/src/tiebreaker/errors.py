"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class KernelValidationError(ValueError):
    """A tabulated kernel grid is malformed."""


class SingularFitError(ArithmeticError):
    """The kernel-weighted design matrix is (numerically) rank deficient."""

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class BracketError(ArithmeticError):
    """A root could not be bracketed."""

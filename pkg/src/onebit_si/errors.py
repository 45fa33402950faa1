"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class DimensionError(ValueError):
    """Array arguments have inconsistent shapes."""


class NumericalDegeneracyError(FloatingPointError):
    """A normalizing constant vanished after log-domain rescaling."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class GampDivergenceError(FloatingPointError):
    """A GAMP iterate became non-finite."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class OracleError(RuntimeError):
    """Reference quadrature failed to reach its accuracy target."""

"""Exception types shared across the package.

The CLI maps ParameterError (and subclasses) to exit code 1 and
NumericalError to exit code 2.
"""


class PathsigError(Exception):
    """Base class for all package errors."""


class ParameterError(PathsigError, ValueError):
    """Invalid argument or configuration value."""


class ContractError(ParameterError):
    """An input violates a documented precondition (e.g. non-orthogonal
    design passed to an orthogonal-only routine)."""


class DeletionEventError(ParameterError):
    """A covariance statistic was requested at a knot whose event is a
    variable deletion; the statistic is defined for entering events only."""


class NumericalError(PathsigError, ArithmeticError):
    """Numerical failure (rank deficiency, factorization breakdown)."""


class SingularityError(NumericalError):
    """Active Gram matrix is rank deficient within tolerance."""

"""Exception hierarchy shared by all modules.

Each class carries the process exit code the CLI maps it to.
"""


class StableFoldError(Exception):
    exit_code = 1


class ParameterError(StableFoldError, ValueError):
    """A parameter lies outside the domain of the requested operation."""

    exit_code = 2


class NumericalError(StableFoldError, ArithmeticError):
    """A quadrature or series failed to reach its tolerance."""

    exit_code = 3

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class InvariantViolation(NumericalError):
    """A verified inequality failed; this points at an implementation bug."""


class SearchFailure(StableFoldError, RuntimeError):
    exit_code = 4


class RegimeError(StableFoldError, RuntimeError):
    """Preconditions of an asymptotic fit are not met on the supplied grid."""

    exit_code = 5

"""Exception hierarchy.

Validation problems (bad arguments, unknown names, capacity limits) derive
from :class:`ValidationError`; numerical failures (degenerate columns, empty
grids, complex eigenvalues) derive from :class:`NumericalError`. The CLI maps
the two families onto different exit codes.
"""


class EigensensError(Exception):
    """Base class for all package errors."""


class ValidationError(EigensensError, ValueError):
    pass


class EmptyResultError(ValidationError):
    pass


class DimensionMismatchError(ValidationError):
    pass


class CapacityError(ValidationError):
    pass


class UnknownVariableError(ValidationError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NumericalError(EigensensError, ArithmeticError):
    pass


class ComplexEigenvalueError(NumericalError):
    pass


class DegenerateColumnError(NumericalError):
    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"column {column!r} is degenerate (zero spread)")


class EmptyGridError(NumericalError):
    pass

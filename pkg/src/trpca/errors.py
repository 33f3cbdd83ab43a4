"""Exception types shared across the package.

The CLI maps these onto exit codes: ``DataError`` -> 3, ``NumericError`` -> 4.
"""


class TRPCAError(Exception):
    """Base class for all package errors."""


class DimensionError(TRPCAError, ValueError):
    """Array shapes are incompatible with the requested operation."""


class DataError(TRPCAError, ValueError):
    """Input data cannot be parsed or used as a matrix."""


class NumericError(TRPCAError, ArithmeticError):
    """Non-finite values or a numerical failure."""

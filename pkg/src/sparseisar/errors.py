"""Exception types raised across the package."""


class IsarError(Exception):
    """Base class for all package errors."""


class ParameterError(IsarError, ValueError):
    """An argument is outside its admissible range."""


class DimensionError(IsarError, ValueError):
    """Array shapes are inconsistent with each other or with the radar grid."""


class StructureError(IsarError, ValueError):
    """A Toeplitz lag array violates Hermitian lag symmetry."""


class OrderError(IsarError, ValueError):
    """A requested model order cannot be supported by the data size."""


class SolverError(IsarError, RuntimeError):
    """An iterative solver diverged (NaN or inf residuals)."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class FormatError(IsarError, ValueError):
    """A file does not follow the expected on-disk layout."""

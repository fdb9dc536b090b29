"""Sparse-aperture ISAR simulation with reweighted atomic-norm reconstruction."""

from .errors import (
    DimensionError,
    FormatError,
    IsarError,
    OrderError,
    ParameterError,
    SolverError,
    StructureError,
)
from .frand import SolveResult, SolverConfig, select_lambda, solve
from .model import ApertureMask, RadarParams, Scene, default_params, synthesize_echo

__version__ = "0.1.0"

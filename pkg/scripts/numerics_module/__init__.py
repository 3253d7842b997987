"""Numerical building blocks of the simulator.

This module provides tools for:
- Forward-mode automatic differentiation with a fixed number of partial derivatives
- Block sparse matrices, ILU(0) preconditioning and BiCGStab
- The exception hierarchy shared by every package
"""

from .autodiff import Evaluation, evaluation_type, maximum, minimum, value_of, where
from .errors import (
    ConfigurationError,
    DeckError,
    EvaluationError,
    FactorizationError,
    InputError,
    KeywordSchemaError,
    NumericalError,
    SimulationAbort,
    SimulatorError,
    WellSingularityError,
)
from .linalg import BlockCSR, LinearSolveResult, bicgstab, ilu0_apply, ilu0_factor, spmv

__all__ = [
    "Evaluation",
    "evaluation_type",
    "value_of",
    "where",
    "maximum",
    "minimum",
    "BlockCSR",
    "spmv",
    "ilu0_factor",
    "ilu0_apply",
    "bicgstab",
    "LinearSolveResult",
    "SimulatorError",
    "InputError",
    "DeckError",
    "KeywordSchemaError",
    "ConfigurationError",
    "NumericalError",
    "EvaluationError",
    "FactorizationError",
    "WellSingularityError",
    "SimulationAbort",
]

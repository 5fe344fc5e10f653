"""Computational tools for symplectic invariants of singular Lagrangian fibrations."""

from .errors import (
    ChartEscape,
    ConvergenceError,
    DomainError,
    FlapinvError,
    HypothesisViolated,
    TruncationError,
    VariableMismatch,
)
from .powerseries import TruncatedSeries

__version__ = "0.1.0"

__all__ = [
    "TruncatedSeries",
    "FlapinvError",
    "VariableMismatch",
    "DomainError",
    "TruncationError",
    "ConvergenceError",
    "ChartEscape",
    "HypothesisViolated",
    "__version__",
]

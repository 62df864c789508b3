"""Numerics for N-continued fractions: the map T_N, its invariant measures,
natural extension, transition operator and Gauss-Kuzmin error bounds."""

from .cf_core import Params, DigitSeq, ConvergentPair, Cylinder
from .errors import BudgetExceeded, DegenerateFit, DomainError

__version__ = "0.1.0"

__all__ = [
    "Params",
    "DigitSeq",
    "ConvergentPair",
    "Cylinder",
    "BudgetExceeded",
    "DegenerateFit",
    "DomainError",
]

"""Optimal time to sell a stock driven by telegraph (two-state Markov) noise.

Closed-form free boundaries and value function for every solvable
parameter regime, with an exact simulator to check them.
"""

__version__ = "0.1.0"

from .constants import ClosedForms, char_poly, closed_forms, moment_eigs
from .errors import (
    BracketError,
    DegenerateNoise,
    DomainError,
    NonPositiveParameter,
    RegimeError,
    RootFindingError,
    SubCriticalError,
)
from .model import DOWN, UP, ModelParams, Regime, classify, critical_rate, payoff, validate
from .thresholds import Solution, find_smallest_root, solve
from .value import ValuePoint, deriv, eval, ode_residuals

__all__ = [
    "DOWN",
    "UP",
    "BracketError",
    "ClosedForms",
    "DegenerateNoise",
    "DomainError",
    "ModelParams",
    "NonPositiveParameter",
    "Regime",
    "RegimeError",
    "RootFindingError",
    "Solution",
    "SubCriticalError",
    "ValuePoint",
    "char_poly",
    "classify",
    "closed_forms",
    "critical_rate",
    "deriv",
    "eval",
    "find_smallest_root",
    "moment_eigs",
    "ode_residuals",
    "payoff",
    "solve",
    "validate",
]

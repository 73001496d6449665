"""Scalar fields on boxes, the Markov operator and linear fixed-point solvers."""

from cbrw.fields.field import MAGIC, Exterior, KillingField, ScalarField, write_convergence_log
from cbrw.fields.linear import (
    DEFAULT_TOL,
    METHODS,
    LinearSolution,
    default_max_iters,
    fixed_point_residual,
    solve_linear_field,
)
from cbrw.fields.operator import MarkovOperator

__all__ = [
    "DEFAULT_TOL",
    "MAGIC",
    "METHODS",
    "Exterior",
    "KillingField",
    "LinearSolution",
    "MarkovOperator",
    "ScalarField",
    "default_max_iters",
    "fixed_point_residual",
    "solve_linear_field",
    "write_convergence_log",
]

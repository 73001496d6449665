"""
Visiting probabilities of the infinite snake (q) and the reversed infinite
snake (q-) from the visit fields, without another nonlinear solve.

    by killing   q = sum_y G_r(x, y) r(y):       v = r + (1 - r) A v
    by flags     q = sum_y g(x, y) r(y) Es+(y):   v = r Es+ + A v
    closed       q = 1 - (1 - r) Es+

and the same three with the reversed operator and Es for q-. All three
agree exactly on the truncation box when Es+ (resp. Es) was solved with the
constant-one exterior, so their spread measures solver error only.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from cbrw.errors import BoxError
from cbrw.fields import DEFAULT_TOL, Exterior, MarkovOperator, ScalarField, solve_linear_field
from cbrw.solver.visiting import VisitFields

logger = logging.getLogger(__name__)


def _operator(vf: VisitFields, reverse: bool) -> MarkovOperator:
    op = MarkovOperator(vf.theta, vf.box)
    return op.reversed() if reverse else op


def _check_box(vf: VisitFields, escape: ScalarField) -> None:
    if escape.box != vf.box:
        raise BoxError("escape field and visit fields must share a box")


def _by_killing(vf: VisitFields, reverse: bool, method: str, tol: float, name: str) -> ScalarField:
    r = vf.r.values
    solution = solve_linear_field(
        _operator(vf, reverse), r, 1.0 - r, form="column", method=method, tol=tol, label=name
    )
    return ScalarField(vf.box, solution.values, Exterior.zero(), name)


def _by_flags(
    vf: VisitFields, escape: ScalarField, reverse: bool, method: str, tol: float, name: str
) -> ScalarField:
    _check_box(vf, escape)
    rhs = vf.r.values * escape.values
    solution = solve_linear_field(
        _operator(vf, reverse), rhs, 1.0, form="column", method=method, tol=tol, label=name
    )
    return ScalarField(vf.box, solution.values, Exterior.zero(), name)


def q_by_killing(vf: VisitFields, method: str = "sweep", tol: float = DEFAULT_TOL) -> ScalarField:
    return _by_killing(vf, False, method, tol, "q (killing)")


def q_by_flags(
    vf: VisitFields, es_plus: ScalarField, method: str = "sweep", tol: float = DEFAULT_TOL
) -> ScalarField:
    return _by_flags(vf, es_plus, False, method, tol, "q (flags)")


def q_minus_by_killing(vf: VisitFields, method: str = "sweep", tol: float = DEFAULT_TOL) -> ScalarField:
    return _by_killing(vf, True, method, tol, "q- (killing)")


def q_minus_by_flags(
    vf: VisitFields, escape: ScalarField, method: str = "sweep", tol: float = DEFAULT_TOL
) -> ScalarField:
    return _by_flags(vf, escape, True, method, tol, "q- (flags)")


def q_closed(vf: VisitFields, es_plus: ScalarField) -> ScalarField:
    """q = 1 - (1 - r) Es+."""
    _check_box(vf, es_plus)
    return ScalarField(vf.box, 1.0 - (1.0 - vf.r.values) * es_plus.values, Exterior.zero(), "q (closed)")


def q_minus_closed(vf: VisitFields, escape: ScalarField) -> ScalarField:
    """q- = 1 - (1 - r) Es."""
    _check_box(vf, escape)
    return ScalarField(vf.box, 1.0 - (1.0 - vf.r.values) * escape.values, Exterior.zero(), "q- (closed)")


@dataclass
class QFields:
    q: ScalarField
    q_minus: ScalarField
    q_spread: float
    q_minus_spread: float

    @property
    def max_spread(self) -> float:
        return max(self.q_spread, self.q_minus_spread)


def _spread(*fields: ScalarField) -> float:
    stack = np.stack([f.values for f in fields])
    return float(np.max(stack.max(axis=0) - stack.min(axis=0)))


def q_fields(
    vf: VisitFields,
    escape: ScalarField,
    es_plus: ScalarField,
    method: str = "sweep",
    tol: float = DEFAULT_TOL,
) -> QFields:
    """q and q- by killing, cross-checked against flags and the closed form."""
    q = q_by_killing(vf, method, tol)
    q_minus = q_minus_by_killing(vf, method, tol)
    q_spread = _spread(q, q_by_flags(vf, es_plus, method, tol), q_closed(vf, es_plus))
    q_minus_spread = _spread(
        q_minus, q_minus_by_flags(vf, escape, method, tol), q_minus_closed(vf, escape)
    )
    logger.info(f"q formulas agree to {q_spread:.2e}, q- formulas to {q_minus_spread:.2e}")
    return QFields(q, q_minus, q_spread, q_minus_spread)

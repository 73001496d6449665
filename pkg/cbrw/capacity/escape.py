"""
Escape fields of a finite set K.

    Es   reversed infinite snake avoids K off its root bush:  Es  = A~[(1 - r) Es]
    Es+  infinite snake avoids K off its root bush:           Es+ = A [(1 - r) Es+]
    EsR  reversed spine whose bushes avoid K after their root: EsR = A~[(1 - R) EsR]
    es   invariant snake avoids K off its spine:               es  = (1 - P̄) EsR

All four are linear harmonic equations in the row form v = Op((1 - k) v),
closed by an exterior value for (1 - k) v outside the box (1 by default,
since every escape probability tends to 1 at infinity). The values on K are
the equilibrium weights summed by the branching capacity.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from cbrw.errors import BoxError
from cbrw.fields import (
    DEFAULT_TOL,
    Exterior,
    MarkovOperator,
    ScalarField,
    solve_linear_field,
)
from cbrw.lattice import Box, SetK, as_point
from cbrw.laws import JumpLaw
from cbrw.solver import VisitFields

logger = logging.getLogger(__name__)

ESCAPE_NAMES = ("Es", "Es_plus", "EsR", "es")


@dataclass
class EscapeFields:
    K: SetK
    Es: ScalarField
    Es_plus: ScalarField
    EsR: ScalarField
    es: ScalarField
    exterior: Exterior = field(default_factory=lambda: Exterior.constant(1.0))
    iterations: dict[str, int] = field(default_factory=dict)

    @property
    def box(self) -> Box:
        return self.Es.box

    def field(self, name: str) -> ScalarField:
        if name not in ESCAPE_NAMES:
            raise KeyError(f"unknown escape field '{name}'; expected one of {ESCAPE_NAMES}")
        return getattr(self, name)

    def on_K(self, name: str = "Es") -> np.ndarray:
        """Values at the atoms of K, in K's order."""
        return self.field(name).values_at(self.K.array)

    def ring_min(self, name: str = "Es") -> float:
        """Smallest value on the outermost layer of the box."""
        values = self.field(name).values
        inner = np.ones(values.shape, dtype=bool)
        inner[tuple(slice(1, -1) for _ in values.shape)] = False
        return float(np.min(values[inner]))


def _solve_escape(
    op: MarkovOperator,
    survive: np.ndarray,
    exterior: Exterior,
    method: str,
    tol: float,
    label: str,
) -> tuple[np.ndarray, int]:
    solution = solve_linear_field(
        op,
        np.zeros(op.box.shape),
        survive,
        form="row",
        boundary=op.boundary(exterior),
        method=method,
        tol=tol,
        label=label,
    )
    return solution.values, solution.iterations


def escape_fields(
    K: SetK,
    visit_fields: VisitFields,
    theta: JumpLaw,
    box: Box | None = None,
    tol: float = DEFAULT_TOL,
    method: str = "sweep",
    exterior: Exterior | None = None,
) -> EscapeFields:
    """Solve Es, Es+, EsR and derive es on `box` (default: the visit fields' box)."""
    box = box or visit_fields.box
    if not box.is_inside(visit_fields.box):
        raise BoxError(f"escape box {box} is not inside the visit-field box {visit_fields.box}")
    exterior = exterior or Exterior.constant(1.0)
    r = visit_fields.r.restrict(box).values
    R = visit_fields.R.restrict(box).values
    P_bar = visit_fields.P_bar.restrict(box).values

    op = MarkovOperator(theta, box)
    rop = op.reversed()
    logger.info(f"solving escape fields on radius {box.radius} ({exterior.describe()} exterior)")
    Es, it_es = _solve_escape(rop, 1.0 - r, exterior, method, tol, "Es")
    Es_plus, it_plus = _solve_escape(op, 1.0 - r, exterior, method, tol, "Es+")
    EsR, it_r = _solve_escape(rop, 1.0 - R, exterior, method, tol, "EsR")
    es = (1.0 - P_bar) * EsR

    one = Exterior.constant(1.0)
    fields = EscapeFields(
        K=K,
        Es=ScalarField(box, Es, one, "Es"),
        Es_plus=ScalarField(box, Es_plus, one, "Es+"),
        EsR=ScalarField(box, EsR, one, "EsR"),
        es=ScalarField(box, es, one, "es"),
        exterior=exterior,
        iterations={"Es": it_es, "Es_plus": it_plus, "EsR": it_r},
    )
    logger.debug(f"escape ring minima: Es {fields.ring_min('Es'):.4f}, Es+ {fields.ring_min('Es_plus'):.4f}")
    return fields


@dataclass
class TransitionRow:
    x: tuple[int, ...]
    targets: list[tuple[int, ...]]
    probs: np.ndarray

    @property
    def total(self) -> float:
        return float(self.probs.sum())


def transition_row(
    escape: EscapeFields,
    visit_fields: VisitFields,
    theta: JumpLaw,
    x: Sequence[int],
) -> TransitionRow:
    """P(x, y) = theta(x - y)(1 - r(y)) Es(y) / Es(x) over y = x - e.

    Sites outside the box contribute the exterior value of (1 - r) Es.
    """
    point = np.asarray(as_point(x), dtype=np.int64)
    es_x = escape.Es.value_at(point)
    if es_x <= 0:
        raise BoxError(f"Es vanishes at {tuple(point)}")
    targets = point[None, :] - theta.steps
    inside = escape.box.contains_array(targets)
    weight = np.empty(len(targets))
    if np.any(inside):
        weight[inside] = (1.0 - visit_fields.r.values_at(targets[inside])) * escape.Es.values_at(targets[inside])
    if np.any(~inside):
        weight[~inside] = escape.exterior.evaluate(targets[~inside])
    probs = theta.probs * weight / es_x
    return TransitionRow(tuple(int(c) for c in point), [tuple(int(c) for c in t) for t in targets], probs)

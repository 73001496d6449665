"""
Classical (random-walk) capacity, the baseline the branching capacity reduces
to for the degenerate offspring law.

    e(x)  = A [(1 - 1_K) e]     walk from x never returns to K after time 0
    e-(x) = A~[(1 - 1_K) e-]    the same for the reversed walk

Cap(K) = sum_{a in K} e(a). Both equations use the same row form and
constant-one exterior as the branching escape fields.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from cbrw.fields import DEFAULT_TOL, Exterior, MarkovOperator, ScalarField, solve_linear_field
from cbrw.killed_walk import green_to_set, site_mask
from cbrw.lattice import Box, SetK
from cbrw.laws import JumpLaw

logger = logging.getLogger(__name__)

DEFAULT_MARGIN = 6


@dataclass
class ClassicalCapacity:
    K: SetK
    cap: float
    escape: np.ndarray  # e(a), a in K order
    escape_reversed: np.ndarray
    escape_field: ScalarField
    escape_reversed_field: ScalarField

    @property
    def harmonic(self) -> np.ndarray:
        """Harmonic measure of the reversed walk, e-(a) / Cap."""
        return self.escape_reversed / self.escape_reversed.sum()

    def to_json(self) -> dict[str, Any]:
        return {
            "cap": self.cap,
            "escape": {",".join(map(str, p)): float(v) for p, v in zip(self.K, self.escape)},
            "escape_reversed": {",".join(map(str, p)): float(v) for p, v in zip(self.K, self.escape_reversed)},
        }


def classical_capacity(
    K: SetK,
    theta: JumpLaw,
    box: Box | None = None,
    tol: float = DEFAULT_TOL,
    method: str = "sweep",
) -> ClassicalCapacity:
    if theta.dim < 3:
        raise ValueError(f"classical capacity needs a transient walk, got d={theta.dim}")
    box = box or Box.around(K, DEFAULT_MARGIN)
    op = MarkovOperator(theta, box)
    rop = op.reversed()
    survive = 1.0 - site_mask(box, K)
    one = Exterior.constant(1.0)

    def solve(operator: MarkovOperator, label: str) -> np.ndarray:
        return solve_linear_field(
            operator, np.zeros(box.shape), survive, form="row",
            boundary=operator.boundary(one), method=method, tol=tol, label=label,
        ).values

    forward = ScalarField(box, solve(op, "es"), one, "es")
    backward = ScalarField(box, solve(rop, "es-"), one, "es-")
    escape = forward.values_at(K.array)
    result = ClassicalCapacity(
        K=K,
        cap=float(escape.sum()),
        escape=escape,
        escape_reversed=backward.values_at(K.array),
        escape_field=forward,
        escape_reversed_field=backward,
    )
    logger.info(f"classical capacity of |K|={len(K)}: {result.cap:.6f}")
    return result


def hitting_probability(
    K: SetK,
    theta: JumpLaw,
    box: Box,
    tol: float = DEFAULT_TOL,
    method: str = "sweep",
) -> ScalarField:
    """h(x) = P(walk from x ever visits K), absorbed outside the box (a lower bound)."""
    on_K = site_mask(box, K).astype(float)
    solution = solve_linear_field(
        MarkovOperator(theta, box), on_K, 1.0 - on_K, form="column", method=method, tol=tol, label="hit"
    )
    return ScalarField(box, solution.values, Exterior.zero(), "h")


def first_moment_bound(K: SetK, theta: JumpLaw, x: Sequence[int], tol: float = 1e-3) -> float:
    """sum_{a in K} g(x, a): expected visits to K, an upper bound for every visit probability."""
    return green_to_set(theta, x, K, tol=tol)

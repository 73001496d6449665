"""
Branching capacity BCap(K) = sum_{a in K} Es(a) = sum_{a in K} es(a).

The two sums come from independent solves (first-visit and last-visit
decompositions), so their agreement is a check on the whole pipeline. Each
is bracketed:

upper   p from the zero exterior (a lower bound, so r, P̄, R are too) and the
        escape exterior 1; both push the escape fields up.
lower   p from the first-moment exterior (an upper bound) and the escape
        exterior 1 - q~(x), with q~(x) the far-field visit probability of the
        remainder of the snake computed from the upper BCap.

The reported value is the upper solve; the error bar is the larger of the
two bracket widths.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from cbrw.capacity.classical import DEFAULT_MARGIN
from cbrw.capacity.escape import EscapeFields, escape_fields
from cbrw.errors import InconsistentCapacityError
from cbrw.fields import DEFAULT_TOL, Exterior
from cbrw.lattice import Box, SetK
from cbrw.laws import JumpLaw, OffspringLaw, constant_a_d, constant_t_d
from cbrw.solver import VisitFields, solve_visiting

logger = logging.getLogger(__name__)

GAP_FACTOR = 5.0
GAP_FLOOR = 1e-9


def _key(point: tuple[int, ...]) -> str:
    return ",".join(str(c) for c in point)


@dataclass
class CapacityResult:
    """
    BCap(K) from both decompositions, with truncation brackets.

    The upper ends of first_interval and last_interval are certified: zero
    exterior for p and exterior 1 for the escape fields. The lower ends are
    not. Their escape exterior 1 - q~ uses the asymptotic far-field visit
    probability a_d BCap dist^{2-d} + t_d a_d^2 sigma^2 BCap / 2 dist^{4-d},
    so error_bar is an estimate of the truncation error, not a bound on it.
    With bracket=False both intervals collapse to the point value and
    error_bar is 0.
    """

    K: SetK
    bcap_first: float
    bcap_last: float
    error_bar: float
    harmonic_first: np.ndarray
    harmonic_last: np.ndarray
    first_interval: tuple[float, float]
    last_interval: tuple[float, float]
    box: Box
    visit_fields: VisitFields | None = field(default=None, repr=False)
    escape: EscapeFields | None = field(default=None, repr=False)

    @property
    def consistency_gap(self) -> float:
        return abs(self.bcap_first - self.bcap_last)

    @property
    def bcap(self) -> float:
        return self.bcap_first

    def harmonic_first_map(self) -> dict[tuple[int, ...], float]:
        return {p: float(w) for p, w in zip(self.K, self.harmonic_first)}

    def harmonic_last_map(self) -> dict[tuple[int, ...], float]:
        return {p: float(w) for p, w in zip(self.K, self.harmonic_last)}

    def to_json(self) -> dict[str, Any]:
        return {
            "bcap_first": self.bcap_first,
            "bcap_last": self.bcap_last,
            "gap": self.consistency_gap,
            "error_bar": self.error_bar,
            "harmonic_first": {_key(p): float(w) for p, w in zip(self.K, self.harmonic_first)},
            "harmonic_last": {_key(p): float(w) for p, w in zip(self.K, self.harmonic_last)},
        }


def far_field_visit(mu: OffspringLaw, theta: JumpLaw, K: SetK, bcap: float) -> Exterior:
    """Exterior 1 - q~ for the escape fields, q~ the far-field visit probability."""
    d = theta.dim
    a_d = constant_a_d(d, theta.Q)
    spine = constant_t_d(d, theta.Q) * a_d**2 * mu.sigma2 * bcap / 2
    root = a_d * bcap
    centre = K.array.astype(float).mean(axis=0)
    norm = theta.norm

    def value(coords: np.ndarray) -> np.ndarray:
        dist = np.maximum(norm.many(coords - centre), 1.0)
        q = spine * dist ** (4 - d) + root * dist ** (2 - d)
        return np.clip(1.0 - q, 0.0, 1.0)

    return Exterior.function(value, label="1 - far-field visit")


def _sums(escape: EscapeFields) -> tuple[np.ndarray, np.ndarray]:
    return escape.on_K("Es"), escape.on_K("es")


def branching_capacity(
    K: SetK,
    mu: OffspringLaw,
    theta: JumpLaw,
    box: Box | None = None,
    tol: float = DEFAULT_TOL,
    method: str = "sweep",
    solver: str = "picard",
    bracket: bool = True,
) -> CapacityResult:
    box = box or Box.around(K, DEFAULT_MARGIN)
    logger.info(f"branching capacity of |K|={len(K)} on radius {box.radius} ({mu.name}, {theta.name})")

    central = solve_visiting(K, mu, theta, box, tol=tol, method=solver, bracket="lower")
    upper_escape = escape_fields(K, central, theta, box, tol=tol, method=method)
    first, last = _sums(upper_escape)
    bcap_first, bcap_last = float(first.sum()), float(last.sum())
    first_interval = (bcap_first, bcap_first)
    last_interval = (bcap_last, bcap_last)
    error_bar = 0.0

    if bracket:
        upper_p = solve_visiting(K, mu, theta, box, tol=tol, method=solver, bracket="upper")
        exterior = far_field_visit(mu, theta, K, bcap_first)
        lower_escape = escape_fields(K, upper_p, theta, box, tol=tol, method=method, exterior=exterior)
        low_first, low_last = _sums(lower_escape)
        first_interval = (float(low_first.sum()), bcap_first)
        last_interval = (float(low_last.sum()), bcap_last)
        error_bar = max(first_interval[1] - first_interval[0], last_interval[1] - last_interval[0])

    result = CapacityResult(
        K=K,
        bcap_first=bcap_first,
        bcap_last=bcap_last,
        error_bar=error_bar,
        harmonic_first=first / bcap_first,
        harmonic_last=last / bcap_last,
        first_interval=first_interval,
        last_interval=last_interval,
        box=box,
        visit_fields=central,
        escape=upper_escape,
    )
    logger.info(
        f"BCap: first {bcap_first:.6f}, last {bcap_last:.6f}, "
        f"gap {result.consistency_gap:.2e}, error bar {error_bar:.2e}"
    )
    if bracket and result.consistency_gap > GAP_FACTOR * error_bar + GAP_FLOOR:
        raise InconsistentCapacityError(result.consistency_gap, error_bar)
    return result

"""
Random walk with killing on a truncation box.

A walk at x dies with probability k(x), otherwise steps by theta. With
M(x, z) = (1 - k(x)) theta(z - x) the killed Green function is
G_k = sum_n M^n, and the harmonic measure Hm^B_k(x, y) sums the path
weights of x -> y paths whose interior vertices lie in B.

Everything is computed for the walk absorbed on leaving the box: mass that
steps outside is dropped. Columns (functions of the start point) use the
operator A, rows (functions of the end point) use the reversed operator.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from typing import Any

import numpy as np

from cbrw.errors import BoxError
from cbrw.fields import (
    DEFAULT_TOL,
    Exterior,
    KillingField,
    LinearSolution,
    MarkovOperator,
    ScalarField,
    solve_linear_field,
)
from cbrw.lattice import Box, SetK, as_point
from cbrw.laws import JumpLaw

logger = logging.getLogger(__name__)

SiteSet = SetK | np.ndarray | Callable[[np.ndarray], np.ndarray] | None


def site_mask(box: Box, B: SiteSet) -> np.ndarray:
    """Boolean array over the box for a set given as SetK, mask or predicate.

    None is the empty set. Points of a SetK outside the box are ignored.
    """
    if B is None:
        return np.zeros(box.shape, dtype=bool)
    if isinstance(B, SetK):
        mask = np.zeros(box.shape, dtype=bool)
        arr = B.array
        inside = box.contains_array(arr)
        if np.any(inside):
            mask[tuple((arr[inside] - box.lower).T)] = True
        return mask
    if callable(B):
        values = np.asarray(B(box.coords()), dtype=bool)
        return values.reshape(box.shape)
    mask = np.asarray(B, dtype=bool)
    if mask.shape != box.shape:
        raise BoxError(f"site mask has shape {mask.shape}, box has {box.shape}")
    return mask


def path_weight(
    gamma: Sequence[Sequence[int]],
    k: ScalarField | Callable[[tuple[int, ...]], float] | float,
    theta: JumpLaw,
) -> float:
    """prod_{i < n} (1 - k(gamma(i))) theta(gamma(i+1) - gamma(i)); 1 for a single vertex."""
    points = [as_point(p) for p in gamma]
    if not points:
        raise ValueError("path must have at least one vertex")
    weight = 1.0
    for here, there in zip(points[:-1], points[1:]):
        if isinstance(k, ScalarField):
            kill = k.value_at(here)
        elif callable(k):
            kill = float(k(here))
        else:
            kill = float(k)
        step = tuple(b - a for a, b in zip(here, there))
        weight *= (1.0 - kill) * theta.prob_of(step)
        if weight == 0.0:
            return 0.0
    return weight


class KilledWalk:
    """Killed Green functions and harmonic measures of one (theta, k) pair."""

    def __init__(
        self,
        theta: JumpLaw,
        killing: KillingField,
        method: str = "sweep",
        tol: float = DEFAULT_TOL,
        max_iters: int | None = None,
    ):
        self.theta = theta
        self.killing = killing
        self.box = killing.box
        self.op = MarkovOperator(theta, self.box)
        self.rop = self.op.reversed()
        self.survive = 1.0 - killing.values
        self.method = method
        self.tol = tol
        self.max_iters = max_iters
        self.last: LinearSolution | None = None

    @classmethod
    def uniform(cls, theta: JumpLaw, box: Box, k: float, **kwargs: Any) -> KilledWalk:
        return cls(theta, KillingField.uniform(box, k), **kwargs)

    def _delta(self, point: Sequence[int]) -> np.ndarray:
        e = np.zeros(self.box.shape)
        e[self.box.local(point)] = 1.0
        return e

    def _solve(self, op: MarkovOperator, rhs: np.ndarray, coef: np.ndarray, form: str, label: str) -> np.ndarray:
        self.last = solve_linear_field(
            op, rhs, coef, form=form, method=self.method, tol=self.tol,
            max_iters=self.max_iters, label=label,
        )
        return self.last.values

    # -- Green functions ----------------------------------------------------

    def green_column(self, y: Sequence[int]) -> ScalarField:
        """G_k(., y): G = delta_y + (1 - k) A G."""
        values = self._solve(self.op, self._delta(y), self.survive, "column", f"G(., {tuple(y)})")
        return ScalarField(self.box, values, Exterior.zero(), name=f"G_k(.,{tuple(y)})")

    def green_row(self, x: Sequence[int]) -> ScalarField:
        """G_k(x, .): h = delta_x + A~((1 - k) h)."""
        values = self._solve(self.rop, self._delta(x), self.survive, "row", f"G({tuple(x)}, .)")
        return ScalarField(self.box, values, Exterior.zero(), name=f"G_k({tuple(x)},.)")

    def green(self, x: Sequence[int], y: Sequence[int]) -> float:
        return self.green_column(y).value_at(x)

    # -- harmonic measures --------------------------------------------------

    def harmonic_column(self, B: SiteSet, y: Sequence[int]) -> ScalarField:
        """Hm^B_k(., y).

        u = delta_y + 1_B (1 - k) A u counts paths z -> y with every vertex
        before y in B; one unconstrained first step then gives
        Hm(x, y) = delta_xy + (1 - k(x)) (A u)(x).
        """
        mask = site_mask(self.box, B)
        u = self._solve(self.op, self._delta(y), mask * self.survive, "column", f"Hm(., {tuple(y)})")
        values = self._delta(y) + self.survive * self.op.apply(u)
        return ScalarField(self.box, values, Exterior.zero(), name=f"Hm_k(.,{tuple(y)})")

    def harmonic_row(self, B: SiteSet, x: Sequence[int]) -> ScalarField:
        """Hm^B_k(x, .).

        z = w + A~((1 - k) 1_B z) with w(y) = (1 - k(x)) theta(y - x) sums
        the paths of length >= 1; the empty path adds delta_x.
        """
        mask = site_mask(self.box, B)
        start = self._delta(x)
        first = self.survive[self.box.local(x)] * self.rop.apply(start)
        z = self._solve(self.rop, first, mask * self.survive, "row", f"Hm({tuple(x)}, .)")
        return ScalarField(self.box, start + z, Exterior.zero(), name=f"Hm_k({tuple(x)},.)")


def green_killed(
    k: KillingField,
    theta: JumpLaw,
    y: Sequence[int],
    box: Box | None = None,
    tol: float = DEFAULT_TOL,
    method: str = "sweep",
    max_iters: int | None = None,
) -> ScalarField:
    """Column G_k(., y) of the killed Green function, absorbed outside the box."""
    if box is not None and box != k.box:
        k = KillingField.from_field(_regrid(k, box))
    if not k.box.contains(y):
        raise BoxError(f"target {tuple(y)} outside {k.box}")
    walk = KilledWalk(theta, k, method=method, tol=tol, max_iters=max_iters)
    column = walk.green_column(y)
    assert walk.last is not None
    logger.debug(f"green_killed: {walk.last.iterations} iterations, residual {walk.last.residual:.2e}")
    return column


def harmonic_measure(
    B: SiteSet,
    k: KillingField,
    theta: JumpLaw,
    x: Sequence[int],
    y: Sequence[int],
    tol: float = DEFAULT_TOL,
    method: str = "sweep",
) -> float:
    """Hm^B_k(x, y) on the killing field's box."""
    for point in (x, y):
        if not k.box.contains(point):
            raise BoxError(f"{tuple(point)} outside {k.box}")
    walk = KilledWalk(theta, k, method=method, tol=tol)
    return walk.harmonic_column(B, y).value_at(x)


def _regrid(field: ScalarField, box: Box) -> ScalarField:
    """Field values on another box, falling back to the exterior policy."""
    values = field.values_at(box.coords()).reshape(box.shape)
    return ScalarField(box, values, field.exterior, field.name)

"""Helpers shared by the experiment suites."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from cbrw.capacity import CapacityResult, branching_capacity
from cbrw.experiments.runner import RunContext
from cbrw.fields import write_convergence_log
from cbrw.lattice import Box, Point, SetK, as_point, origin
from cbrw.laws import JumpLaw, OffspringLaw
from cbrw.solver import VisitFields, solve_visiting

logger = logging.getLogger(__name__)


def axis_point(d: int, n: int, axis: int = 0) -> Point:
    coords = [0] * d
    coords[axis] = int(n)
    return as_point(coords)


def axis_sites(d: int, lo: float, hi: float, theta: JumpLaw) -> list[Point]:
    """Sites n e_1 with lo <= ||n e_1|| <= hi, in increasing norm."""
    unit_norm = theta.norm(axis_point(d, 1))
    first = int(np.ceil(lo / unit_norm - 1e-9))
    last = int(np.floor(hi / unit_norm + 1e-9))
    return [axis_point(d, n) for n in range(max(first, 1), last + 1)]


def capacity(
    ctx: RunContext,
    K: SetK,
    box: Box | None = None,
    mu: OffspringLaw | None = None,
    theta: JumpLaw | None = None,
    bracket: bool | None = None,
) -> CapacityResult:
    solver = ctx.config.solver
    result = branching_capacity(
        K,
        mu or ctx.mu,
        theta or ctx.theta,
        box=box or ctx.box(),
        tol=solver.tol,
        method=solver.method,
        solver=solver.nonlinear,
        bracket=solver.bracket if bracket is None else bracket,
    )
    ctx.check_budget()
    return result


def visit_pair(ctx: RunContext, K: SetK, box: Box | None = None) -> tuple[VisitFields, VisitFields]:
    """Lower (zero exterior) and upper (first-moment exterior) visit fields."""
    box = box or ctx.box()
    solver = ctx.config.solver
    lower = solve_visiting(K, ctx.mu, ctx.theta, box, tol=solver.tol, method=solver.nonlinear, bracket="lower")
    upper = solve_visiting(K, ctx.mu, ctx.theta, box, tol=solver.tol, method=solver.nonlinear, bracket="upper")
    write_convergence_log(ctx.out_dir / "convergence_lower.csv", lower.history)
    write_convergence_log(ctx.out_dir / "convergence_upper.csv", upper.history)
    ctx.check_budget()
    return lower, upper


def set_label(K: SetK | None) -> str:
    if K is None:
        return "{}"
    return ";".join(",".join(str(c) for c in p) for p in K)


def margin_box(K: SetK, margin: int) -> Box:
    reach = int(np.max(np.abs(K.array)))
    return Box(origin(K.dim), reach + margin)


def spread_ratio(values: Sequence[float]) -> float:
    """max / min of positive values."""
    arr = np.asarray(values, dtype=float)
    return float(arr.max() / arr.min())


def padded(points: Sequence[Sequence[int]], d: int) -> SetK:
    """SetK from points given in a lower dimension, padded with zeros."""
    return SetK.of([list(p) + [0] * (d - len(p)) for p in points])


def visit_lower(ctx: RunContext, K: SetK, box: Box | None = None) -> VisitFields:
    solver = ctx.config.solver
    fields = solve_visiting(
        K, ctx.mu, ctx.theta, box or ctx.box(), tol=solver.tol, method=solver.nonlinear, bracket="lower"
    )
    ctx.check_budget()
    return fields

"""Killed Green functions: first-visit identities and comparison with g."""

from __future__ import annotations

import numpy as np

from cbrw.experiments.runner import RunContext, experiment
from cbrw.experiments.suites.common import axis_point, visit_lower
from cbrw.fields import KillingField, ScalarField
from cbrw.killed_walk import far_field, first_visit_identity_check, green_killed, plain_green_field
from cbrw.lattice import Box, Point, SetK, origin
from cbrw.solver import VisitFields

COLUMNS = ["part", "killing", "x", "y", "green_killed", "green_box", "green_plain", "ratio", "residual"]


def _identities(ctx: RunContext, lower: VisitFields) -> None:
    d = ctx.d
    radius = int(ctx.param("identity_radius", 3))
    method = ctx.param("identity_method", "direct")
    box = Box(origin(d), radius)
    killings = {
        "zero": KillingField.uniform(box, 0.0),
        "r": KillingField.from_field(lower.r.restrict(box), name="k=r"),
    }
    B = SetK((origin(d), axis_point(d, 1), axis_point(d, 1, axis=1)))
    a, b = axis_point(d, 1), axis_point(d, 2)
    tol = ctx.tolerance("identity_residual", 1e-10)
    worst = 0.0
    for name, k in killings.items():
        residuals = first_visit_identity_check(B, k, a, b, ctx.theta, method=method)
        worst = max(worst, residuals.max_residual)
        ctx.add_row(
            part="identity", killing=name, x=a, y=b,
            green_killed=residuals.green_ab, residual=residuals.max_residual,
        )
    ctx.check(3, "first-visit identities hold", worst < tol, worst, tol)


def _ratio(ctx: RunContext, lower: VisitFields) -> None:
    d, theta = ctx.d, ctx.theta
    far = float(ctx.param("far_norm", 4.0))
    box = lower.box
    zero = KillingField.uniform(box, 0.0)
    r_kill = lower.killing()

    # box calibration: G_0(0, x) against a_d ||x||^{2-d} at the far norm
    n = int(np.ceil(far / theta.norm(axis_point(d, 1))))
    x_cal = axis_point(d, n)
    g_box = green_killed(zero, theta, x_cal).value_at(origin(d))
    calibration = abs(g_box / far_field(theta, x_cal) - 1.0)
    cal_tol = ctx.tolerance("box_calibration", 0.05)
    ctx.add_row(part="calibration", killing="zero", x=origin(d), y=x_cal, green_box=g_box,
                green_plain=far_field(theta, x_cal), ratio=g_box / far_field(theta, x_cal))
    ctx.check(14, "box reproduces a_d ||x||^{2-d}", calibration < cal_tol, calibration, cal_tol)

    pairs = [
        (axis_point(d, n), axis_point(d, -n)),
        (axis_point(d, n), axis_point(d, n + 2)),
        (axis_point(d, n, axis=1), axis_point(d, n)),
        (axis_point(d, 1), axis_point(d, 2)),
        (axis_point(d, 2, axis=1), axis_point(d, -2)),
    ]
    slack = ctx.tolerance("bound_slack", 1e-6)
    ratio_floor = ctx.tolerance("ratio_floor", 0.9)
    violations, worst_ratio = 0, np.inf
    columns: dict[Point, tuple[ScalarField, ScalarField, ScalarField]] = {}
    for y in dict.fromkeys(y for _, y in pairs):
        killed = green_killed(r_kill, theta, y)
        plain = plain_green_field(theta, y, box)
        columns[y] = (killed, plain, green_killed(zero, theta, y))
        # G_r(x, y) <= g(x, y) at every site of the solved column
        over = int(np.count_nonzero(killed.values > plain.values * (1 + slack)))
        violations += over
        ctx.add_row(part="column", killing="r", y=y, green_killed=killed.value_at(y), green_plain=plain.value_at(y),
                    ratio=float(np.max(killed.values / plain.values)), residual=over)
        ctx.check_budget()

    for x, y in pairs:
        killed, plain, box_column = columns[y]
        g_xy = plain.value_at(x)
        ratio = killed.value_at(x) / g_xy
        if theta.norm(x) >= far and theta.norm(y) >= far:
            worst_ratio = min(worst_ratio, ratio)
        ctx.add_row(part="ratio", killing="r", x=x, y=y, green_killed=killed.value_at(x),
                    green_box=box_column.value_at(x), green_plain=g_xy, ratio=ratio)
        ctx.check_budget()
    ctx.check(14, "G_r <= g on every solved column", violations == 0, violations, slack)
    ctx.check(14, "G_r / g near 1 far from K", worst_ratio >= ratio_floor, worst_ratio, ratio_floor)


@experiment("green-ratio", COLUMNS, criteria=(3, 14))
def run_green_ratio(ctx: RunContext) -> None:
    """First-visit identities for killed walks, and G_r against g far from K."""
    lower = visit_lower(ctx, ctx.K)
    _identities(ctx, lower)
    _ratio(ctx, lower)

"""Two-sided bound p_A(x) ~ BCap(A) dist(x, A)^{2-d} for finite A."""

from __future__ import annotations

import numpy as np

from cbrw.experiments.runner import RunContext, experiment
from cbrw.experiments.suites.common import capacity, set_label, visit_lower
from cbrw.lattice import BallKind, Box, Point, SetK, as_point, ball, diam, dist, origin, random_subset

COLUMNS = ["set", "size", "x", "dist", "diam", "p", "bcap", "ratio"]

MAX_DRAWS = 10_000


def _far_sites(ctx: RunContext, A: SetK, reach: int, count: int, rng: np.random.Generator) -> list[Point]:
    """Uniform sites of the cube [-reach, reach]^d with dist(x, A) >= 0.1 diam(A), x not in A."""
    Q, d = ctx.theta.Q, ctx.d
    floor = 0.1 * diam(A, Q)
    sites: list[Point] = []
    for _ in range(MAX_DRAWS):
        if len(sites) == count:
            break
        x = as_point(rng.integers(-reach, reach + 1, size=d))
        if x in A or x in sites:
            continue
        if dist(A, x, Q) >= floor:
            sites.append(x)
    return sites


@experiment("bd-finite", COLUMNS, criteria=(11,))
def run_bd_finite(ctx: RunContext) -> None:
    """p_A(x) dist(x, A)^{d-2} / BCap(A) stays in one interval over random (x, A)."""
    d, theta = ctx.d, ctx.theta
    parent = ball(BallKind.THETA_NORM, float(ctx.param("set_ball_radius", 2.0)), d=d, Q=theta.Q)
    n_sets = int(ctx.param("sets", 3))
    per_set = int(ctx.param("sites_per_set", 4))
    max_size = min(int(ctx.param("max_set_size", 6)), len(parent))
    reach = int(ctx.param("site_reach", 5))
    box = Box(origin(d), reach + int(ctx.param("margin", 3)))
    rng = ctx.rng(0)

    ratios = []
    for _ in range(n_sets):
        A = random_subset(parent, int(rng.integers(1, max_size + 1)), rng)
        fields = visit_lower(ctx, A, box)
        bcap = capacity(ctx, A, box).bcap_first
        width = diam(A, theta.Q)
        for x in _far_sites(ctx, A, reach, per_set, rng):
            gap = dist(A, x, theta.Q)
            p = fields.p.value_at(x)
            ratio = p * gap ** (d - 2) / bcap
            ratios.append(ratio)
            ctx.add_row(set=set_label(A), size=len(A), x=x, dist=gap, diam=width, p=p, bcap=bcap, ratio=ratio)
        ctx.check_budget()

    spread_tol = ctx.tolerance("bound_spread", 20.0)
    spread = float(np.max(ratios) / np.min(ratios)) if ratios else np.inf
    ctx.check(11, "c1 <= p dist^{d-2} / BCap <= c2 with c2/c1 bounded", spread < spread_tol, spread, spread_tol)

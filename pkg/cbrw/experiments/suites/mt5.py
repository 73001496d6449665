"""
BCap under two offspring laws: ratios stay within the domination constant.

An optional second jump law adds an exploratory ratio column; it is not
checked.
"""

from __future__ import annotations

import logging

from cbrw.experiments.runner import RunContext, experiment
from cbrw.experiments.suites.common import capacity, margin_box, set_label
from cbrw.lattice import BallKind, SetK, ball, origin, random_subset
from cbrw.laws import get_jump_law, get_offspring_law
from cbrw.solver import offspring_domination_constant

logger = logging.getLogger(__name__)

COLUMNS = ["set", "size", "bcap_mu1", "bcap_mu2", "ratio", "lower", "upper", "jump_ratio"]


def _test_sets(ctx: RunContext) -> list[SetK]:
    d, Q = ctx.d, ctx.theta.Q
    sets = [SetK.single(origin(d))]
    for r in ctx.param("ball_radii", [1, 2]):
        sets.append(ball(BallKind.THETA_NORM, float(r), d=d, Q=Q))
    parent = ball(BallKind.THETA_NORM, float(ctx.param("set_ball_radius", 2.0)), d=d, Q=Q)
    top = min(int(ctx.param("max_set_size", 6)), len(parent))
    rng = ctx.rng(0)
    while len(sets) < int(ctx.param("sets", 5)):
        sets.append(random_subset(parent, int(rng.integers(1, top + 1)), rng))
    return sets


@experiment("mt5", COLUMNS, criteria=(12,))
def run_mt5(ctx: RunContext) -> None:
    """bcap_mu1(A) / bcap_mu2(A) lies in [1/C, C] over a family of test sets."""
    mu1 = ctx.mu
    mu2 = get_offspring_law(ctx.param("compare_offspring", "geometric"))
    C = max(offspring_domination_constant(mu1, mu2), offspring_domination_constant(mu2, mu1))
    logger.info(f"comparing {mu1.name} with {mu2.name}: C = {C:.4f}")
    jump = ctx.param("compare_jump", None)
    theta2 = get_jump_law(jump, ctx.d) if jump else None
    margin = int(ctx.param("margin", 3))

    outside = 0
    for A in _test_sets(ctx):
        box = margin_box(A, margin)
        first = capacity(ctx, A, box, mu=mu1).bcap_first
        second = capacity(ctx, A, box, mu=mu2).bcap_first
        jump_ratio = first / capacity(ctx, A, box, theta=theta2).bcap_first if theta2 else None
        ratio = first / second
        outside += not (1.0 / C <= ratio <= C)
        ctx.add_row(set=set_label(A), size=len(A), bcap_mu1=first, bcap_mu2=second, ratio=ratio,
                    lower=1.0 / C, upper=C, jump_ratio=jump_ratio)

    ctx.check(12, f"BCap ratios for {mu1.name}/{mu2.name} within [1/C, C]", outside == 0, outside, [1.0 / C, C])

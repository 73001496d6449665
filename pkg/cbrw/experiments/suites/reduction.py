"""Degenerate offspring law: branching capacity against classical capacity."""

from __future__ import annotations

from cbrw.capacity import classical_capacity
from cbrw.experiments.runner import RunContext, experiment
from cbrw.experiments.suites.common import capacity, padded, set_label
from cbrw.killed_walk import plain_green

DEFAULT_SETS = (
    [[0, 0, 0, 0, 0]],
    [[0, 0, 0, 0, 0], [1, 0, 0, 0, 0]],
    [[0, 0, 0, 0, 0], [1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0], [2, 1, 0, 0, 0]],
)

COLUMNS = ["set", "size", "bcap_first", "bcap_last", "error_bar", "cap", "cap_green", "rel_err"]


@experiment("reduction", COLUMNS, criteria=(1,))
def run_reduction(ctx: RunContext) -> None:
    """mu = delta_1: BCap(K) equals Cap(K) for a singleton, a pair and a five-point set."""
    tol = ctx.tolerance("reduction_rel", 0.02)
    worst = 0.0
    for points in ctx.param("sets", DEFAULT_SETS):
        K = padded(points, ctx.d)
        bcap = capacity(ctx, K)
        cap = classical_capacity(K, ctx.theta, ctx.box(), tol=ctx.config.solver.tol).cap
        rel = max(abs(bcap.bcap_first - cap), abs(bcap.bcap_last - cap)) / cap
        cap_green = None
        if len(K) == 1:
            cap_green = 1.0 / plain_green(ctx.theta, K.points[0], K.points[0]).value
            rel = max(rel, abs(bcap.bcap_first - cap_green) / cap_green)
        worst = max(worst, rel)
        ctx.add_row(
            set=set_label(K),
            size=len(K),
            bcap_first=bcap.bcap_first,
            bcap_last=bcap.bcap_last,
            error_bar=bcap.error_bar,
            cap=cap,
            cap_green=cap_green,
            rel_err=rel,
        )
    ctx.check(1, "BCap equals Cap for the degenerate law", worst < tol, worst, tol)

"""Entering measures conditioned on a visit, against the limit hm_K."""

from __future__ import annotations

from cbrw.capacity import conditional_entering_comparison
from cbrw.experiments.runner import RunContext, experiment
from cbrw.experiments.suites.common import axis_point, capacity, margin_box, padded

TWO_POINTS = ([0], [2])

COLUMNS = ["x", "norm", "accepted", "tv", "first_z", "last_z", "range_tv", "hm_samples", "hm_tail"]


@experiment("entering", COLUMNS, criteria=(13,))
def run_entering(ctx: RunContext) -> None:
    """TV(entering measure from x | visit, hm_K) falls with ||x||; first/last atoms match the harmonic measures."""
    d, theta = ctx.d, ctx.theta
    K = padded(ctx.param("entering_set", TWO_POINTS), d)
    unit_norm = theta.norm(axis_point(d, 1))
    x_list = [axis_point(d, round(n / unit_norm)) for n in ctx.param("norms", [3, 4, 6])]
    result = capacity(ctx, K, margin_box(K, int(ctx.param("margin", 6))))

    comparison = conditional_entering_comparison(
        result,
        theta,
        x_list,
        ctx.config.monte_carlo.n_samples,
        ctx.stream(0),
        n_hm=ctx.param("hm_samples", None),
        caps=ctx.caps,
        threads=ctx.threads,
        min_accepted=int(ctx.param("min_accepted", 200)),
        with_range=bool(ctx.param("with_range", False)),
    )
    ctx.check_budget()
    for row in comparison.rows:
        ctx.add_row(
            x=row.x, norm=row.norm, accepted=row.accepted, tv=row.tv, first_z=row.first_z,
            last_z=row.last_z, range_tv=row.range_tv, hm_samples=comparison.hm_samples,
            hm_tail=comparison.hm_tail_max,
        )

    ctx.check(13, "TV to hm_K decreases with ||x||", comparison.tv_decreasing(), comparison.tv)
    sigmas = ctx.tolerance("histogram_sigmas", 3.0)
    far = comparison.rows[-1]
    ctx.check(13, "first-visit atoms follow Es(a)/BCap", far.first_z <= sigmas, far.first_z, sigmas)
    ctx.check(13, "last-visit atoms follow es(a)/BCap", far.last_z <= sigmas, far.last_z, sigmas)

"""One-dimensional half-line recursion: p(x) = O(x^-2) and its certificate."""

from __future__ import annotations

import numpy as np

from cbrw.experiments.runner import RunContext, experiment
from cbrw.solver import certify_halfline_constant, solve_halfline

COLUMNS = ["x", "p", "scaled", "generations", "certified_c"]


@experiment("halfline", COLUMNS, criteria=(8,))
def run_halfline(ctx: RunContext) -> None:
    """Half-line visiting probabilities: sup x^2 p(x) is finite and flat."""
    xmax = int(ctx.param("xmax", 256))
    n_gens = ctx.param("generations", 100_000)
    sup_lo, sup_hi = ctx.param("sup_range", [8, 128])
    flat_lo, flat_hi = ctx.param("flat_range", [32, 128])
    profile = solve_halfline(ctx.mu, ctx.theta, xmax, n_gens=None if n_gens is None else int(n_gens))
    ctx.check_budget()
    certificate = certify_halfline_constant(ctx.mu, ctx.theta, x_check=int(ctx.param("x_check", 2048)))
    ctx.check_budget()

    for x, p, scaled in zip(profile.x, profile.p, profile.scaled):
        ctx.add_row(x=int(x), p=p, scaled=scaled, generations=profile.generations, certified_c=certificate.c)

    sup = profile.sup_scaled(sup_lo, sup_hi)
    plateau = profile.plateau(flat_lo, flat_hi)
    flat_tol = ctx.tolerance("flat_ratio", 2.0)
    ctx.check(8, "sup x^2 p(x) is finite", bool(np.isfinite(sup)), sup)
    ctx.check(8, "x^2 p(x) is flat", plateau["ratio"] < flat_tol, plateau["ratio"], flat_tol)
    ctx.check(8, "1 ^ (c/x^2) is a supersolution", certificate.report.ok, certificate.c)

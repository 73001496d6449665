"""
Visiting probability asymptotics and the first-visit decomposition.

profile rows: p(x) along an axis from both truncation brackets, scaled by
||x||^{d-2} / a_d, whose plateau is BCap(K).
key rows: frequency of "first visit at a" for snakes from x against the
killed Green function G_r(x, a).
"""

from __future__ import annotations

import numpy as np

from cbrw.experiments.fitting import fit_power_law
from cbrw.experiments.runner import RunContext, experiment
from cbrw.experiments.suites.common import axis_sites, capacity, padded, spread_ratio, visit_pair
from cbrw.killed_walk import green_killed
from cbrw.laws import constant_a_d
from cbrw.snakes import estimate_visit_prob

KEY_SET = ([0], [1], [0, 1])
KEY_SITES = ([3], [4], [0, 3], [0, 0, 3], [2, 2], [-3], [0, -3], [3, 1], [1, 3, 1], [2, -2])

COLUMNS = [
    "part",
    "x",
    "norm",
    "atom",
    "p_lower",
    "p_upper",
    "scaled",
    "green_lower",
    "green_upper",
    "mc_freq",
    "mc_stderr",
    "z",
]


def _profile(ctx: RunContext) -> None:
    d, theta = ctx.d, ctx.theta
    lo, hi = ctx.param("fit_range", [3.0, 7.0])
    plateau_lo, plateau_hi = ctx.param("plateau_range", [5.0, 7.0])
    lower, upper = visit_pair(ctx, ctx.K)
    bcap = capacity(ctx, ctx.K)
    a_d = constant_a_d(d, theta.Q)

    fit_pairs, plateau = [], []
    for x in axis_sites(d, min(lo, plateau_lo), max(hi, plateau_hi), theta):
        norm = theta.norm(x)
        p_lo, p_hi = lower.p.value_at(x), upper.p.value_at(x)
        scaled = p_hi * norm ** (d - 2) / a_d
        ctx.add_row(part="profile", x=x, norm=norm, p_lower=p_lo, p_upper=p_hi, scaled=scaled)
        if lo <= norm <= hi:
            fit_pairs.append((norm, p_hi))
        if plateau_lo <= norm <= plateau_hi:
            plateau.append(scaled)

    fit = fit_power_law(fit_pairs)
    slope_tol = ctx.tolerance("slope", 0.3)
    ctx.check(
        5, "p(x) decays like ||x||^{2-d}", fit.slope_within(2 - d, slope_tol), fit.slope, [2 - d, slope_tol]
    )
    flat_tol = ctx.tolerance("plateau_variation", 0.15)
    variation = spread_ratio(plateau) - 1.0
    ctx.check(5, "p(x) ||x||^{d-2} / a_d is flat", variation < flat_tol, variation, flat_tol)
    level_tol = ctx.tolerance("plateau_vs_bcap", 0.15)
    low = min(bcap.first_interval[0], bcap.last_interval[0]) * (1 - level_tol)
    high = max(bcap.first_interval[1], bcap.last_interval[1]) * (1 + level_tol)
    level = float(np.mean(plateau))
    ctx.check(5, "plateau matches BCap", low <= level <= high, level, [low, high])


def _key_formula(ctx: RunContext) -> None:
    d, theta = ctx.d, ctx.theta
    K = padded(ctx.param("key_set", KEY_SET), d)
    sites = ctx.config.sites or [list(padded([s], d).points[0]) for s in KEY_SITES]
    lower, upper = visit_pair(ctx, K)
    columns = {}
    for a in K:
        columns[a] = (
            green_killed(lower.killing(), theta, a, tol=ctx.config.solver.tol),
            green_killed(upper.killing(), theta, a, tol=ctx.config.solver.tol),
        )
    sigmas = ctx.tolerance("key_sigmas", 3.0)
    sum_tol = ctx.tolerance("key_sum", 1e-8)
    misses, worst_sum = 0, 0.0
    for i, x in enumerate(sites):
        x = tuple(x)
        estimate = estimate_visit_prob(
            "snake", x, K, ctx.config.monte_carlo.n_samples, ctx.stream(i),
            mu=ctx.mu, theta=theta, caps=ctx.caps, threads=ctx.threads,
        )
        ctx.check_budget()
        freqs = estimate.first_frequencies()
        p_lo, p_hi = lower.p.value_at(x), upper.p.value_at(x)
        total = 0.0
        for j, a in enumerate(K):
            g_lo, g_hi = columns[a][0].value_at(x), columns[a][1].value_at(x)
            total += g_lo
            se = float(np.sqrt(max(g_lo * (1 - g_lo), 1e-300) / estimate.n_used))
            slack = abs(g_hi - g_lo) + (p_hi - p_lo)
            z = max(abs(freqs[j] - g_lo) - slack, 0.0) / se
            misses += z > sigmas
            ctx.add_row(
                part="key", x=x, norm=theta.norm(x), atom=a, p_lower=p_lo, p_upper=p_hi,
                green_lower=g_lo, green_upper=g_hi, mc_freq=freqs[j], mc_stderr=se, z=z,
            )
        worst_sum = max(worst_sum, abs(total - p_lo))
    ctx.check(2, "first-visit frequencies match G_r(x, a)", misses == 0, misses, sigmas)
    ctx.check(2, "sum_a G_r(x, a) equals p(x)", worst_sum < sum_tol, worst_sum, sum_tol)


@experiment("mt1", COLUMNS, criteria=(2, 5))
def run_mt1(ctx: RunContext) -> None:
    """Visiting probability decay, its BCap plateau, and the first-visit formula."""
    _profile(ctx)
    _key_formula(ctx)

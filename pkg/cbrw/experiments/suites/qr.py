"""
Exact relations between the visit fields and the infinite-snake visiting
probabilities: the generating-function identities, r / p against sigma^2 / 2,
and q from the killing and flag formulas with its ||x||^{4-d} decay.
"""

from __future__ import annotations

from cbrw.capacity import escape_fields
from cbrw.experiments.fitting import fit_power_law
from cbrw.experiments.runner import RunContext, experiment
from cbrw.experiments.suites.common import axis_sites, visit_pair
from cbrw.solver import q_by_flags, q_by_killing, q_closed, q_minus_by_killing

COLUMNS = [
    "x",
    "norm",
    "p_lower",
    "p_upper",
    "r_lower",
    "r_upper",
    "ratio_lower",
    "ratio_upper",
    "q_killing",
    "q_flags",
    "q_closed",
    "q_minus",
]


@experiment("qr", COLUMNS, criteria=(4, 6, 7))
def run_qr(ctx: RunContext) -> None:
    """p, r and q on a solved box: identities, the r/p ratio, and q's decay."""
    d, theta, solver = ctx.d, ctx.theta, ctx.config.solver
    lower, upper = visit_pair(ctx, ctx.K)

    identity_tol = ctx.tolerance("identity_residual", 1e-9)
    p_res, r_res = lower.consistency_residuals()
    worst = max(p_res, r_res)
    ctx.check(4, "1-p and 1-r as generating functions of 1-s~", worst < identity_tol, worst, identity_tol)

    escape = escape_fields(ctx.K, lower, theta, tol=solver.tol, method=solver.method)
    q_kill = q_by_killing(lower, solver.method, solver.tol)
    q_flag = q_by_flags(lower, escape.Es_plus, solver.method, solver.tol)
    q_exact = q_closed(lower, escape.Es_plus)
    q_minus = q_minus_by_killing(lower, solver.method, solver.tol)
    ctx.check_budget()

    ratio_norm = float(ctx.param("ratio_norm", 5.0))
    q_lo, q_hi = ctx.param("q_range", [3.0, 7.0])
    expected_ratio = ctx.mu.sigma2 / 2
    ratio_half = ctx.tolerance("ratio_halfwidth", 0.05)
    agreement_tol = ctx.tolerance("q_agreement", 0.05)

    ratio_at, worst_gap, q_pairs = None, 0.0, []
    for x in axis_sites(d, 1.0, max(ratio_norm, q_hi), theta):
        norm = theta.norm(x)
        p_lo, p_hi = lower.p.value_at(x), upper.p.value_at(x)
        r_lo, r_hi = lower.r.value_at(x), upper.r.value_at(x)
        qk, qf = q_kill.value_at(x), q_flag.value_at(x)
        ctx.add_row(
            x=x, norm=norm, p_lower=p_lo, p_upper=p_hi, r_lower=r_lo, r_upper=r_hi,
            ratio_lower=r_lo / p_lo, ratio_upper=r_hi / p_hi,
            q_killing=qk, q_flags=qf, q_closed=q_exact.value_at(x), q_minus=q_minus.value_at(x),
        )
        if ratio_at is None and norm >= ratio_norm:
            ratio_at = r_hi / p_hi
        if q_lo <= norm <= q_hi:
            worst_gap = max(worst_gap, abs(qk - qf) / qk)
            q_pairs.append((norm, qk))

    ratio_ok = ratio_at is not None and abs(ratio_at - expected_ratio) <= ratio_half
    ctx.check(6, "r/p near sigma^2/2", ratio_ok, ratio_at, [expected_ratio - ratio_half, expected_ratio + ratio_half])
    ctx.check(7, "q by killing and by flags agree", worst_gap < agreement_tol, worst_gap, agreement_tol)
    fit = fit_power_law(q_pairs)
    slope_tol = ctx.tolerance("q_slope", 0.35)
    ctx.check(7, "q(x) decays like ||x||^{4-d}", fit.slope_within(4 - d, slope_tol), fit.slope, [4 - d, slope_tol])

"""
Branching capacity as a set function: monotonicity and subadditivity on
random sets, and its growth on balls and slabs.
"""

from __future__ import annotations

from cbrw.capacity import CapacityResult
from cbrw.experiments.fitting import fit_power_law
from cbrw.experiments.runner import RunContext, experiment
from cbrw.experiments.suites.common import capacity, margin_box, set_label, spread_ratio
from cbrw.lattice import BallKind, Box, SetK, ball, origin, random_subset
from cbrw.laws import get_jump_law

COLUMNS = ["part", "set", "size", "dim", "radius", "bcap_first", "bcap_last", "error_bar", "bound", "holds"]


class _CapacityCache:
    def __init__(self, ctx: RunContext, box: Box):
        self.ctx = ctx
        self.box = box
        self._cache: dict[frozenset, CapacityResult] = {}

    def __call__(self, K: SetK | None) -> tuple[float, float]:
        """(BCap, error bar); the empty set has capacity 0."""
        if K is None:
            return 0.0, 0.0
        key = frozenset(K.points)
        if key not in self._cache:
            self._cache[key] = capacity(self.ctx, K, self.box)
        result = self._cache[key]
        return result.bcap_first, result.error_bar


def _set_laws(ctx: RunContext) -> None:
    d, theta = ctx.d, ctx.theta
    radius = float(ctx.param("set_ball_radius", 2.0))
    n_pairs = int(ctx.param("pairs", 4))
    max_size = int(ctx.param("max_set_size", 6))
    parent = ball(BallKind.THETA_NORM, radius, d=d, Q=theta.Q)
    cap = _CapacityCache(ctx, margin_box(parent, int(ctx.param("set_margin", 3))))
    rng = ctx.rng(0)
    top = min(max_size, len(parent))
    mono_fail = sub_fail = 0

    for _ in range(n_pairs):
        big = random_subset(parent, int(rng.integers(2, top + 1)) if top >= 2 else 1, rng)
        small = random_subset(big, int(rng.integers(1, len(big) + 1)), rng)
        c_small, _ = cap(small)
        c_big, _ = cap(big)
        holds = c_small <= c_big + 1e-9
        mono_fail += not holds
        ctx.add_row(part="monotone", set=set_label(small), size=len(small), dim=d,
                    bcap_first=c_small, bound=c_big, holds=holds)

        K1 = random_subset(parent, int(rng.integers(1, top + 1)), rng)
        K2 = random_subset(parent, int(rng.integers(1, top + 1)), rng)
        values = [cap(K1), cap(K2), cap(K1.union(K2)), cap(K1.intersection(K2))]
        slack = 2 * max(err for _, err in values)
        left = values[2][0] + values[3][0]
        right = values[0][0] + values[1][0] + slack
        holds = left <= right
        sub_fail += not holds
        ctx.add_row(part="subadditive", set=f"{set_label(K1)}|{set_label(K2)}", size=len(K1) + len(K2),
                    dim=d, bcap_first=left, bound=right, error_bar=slack / 2, holds=holds)
        ctx.check_budget()

    ctx.check(9, "BCap is monotone", mono_fail == 0, mono_fail)
    ctx.check(9, "BCap is subadditive within twice the error bar", sub_fail == 0, sub_fail)


def _ball_growth(ctx: RunContext) -> None:
    d, theta = ctx.d, ctx.theta
    margin = int(ctx.param("ball_margin", 3))
    radii = ctx.param("radii", [1, 2, 3, 4])
    pairs, singleton = [], []
    point = SetK.single(origin(d))
    for r in radii:
        K = ball(BallKind.THETA_NORM, float(r), d=d, Q=theta.Q)
        box = margin_box(K, margin)
        result = capacity(ctx, K, box)
        single = capacity(ctx, point, box)
        pairs.append((float(r), result.bcap_first))
        singleton.append(single.bcap_first)
        ctx.add_row(part="ball", set=f"B({r})", size=len(K), dim=d, radius=r, bcap_first=result.bcap_first,
                    bcap_last=result.bcap_last, error_bar=result.error_bar)
        ctx.add_row(part="singleton", set=set_label(point), size=1, dim=d, radius=box.radius,
                    bcap_first=single.bcap_first, bcap_last=single.bcap_last, error_bar=single.error_bar)

    fit = fit_power_law(pairs)
    slope_tol = ctx.tolerance("ball_slope", 0.25)
    ctx.check(10, "BCap(ball of radius r) grows like r^{d-4}", fit.slope_within(d - 4, slope_tol),
              fit.slope, [d - 4, slope_tol])
    flat_tol = ctx.tolerance("singleton_flat", 0.05)
    variation = spread_ratio(singleton) - 1.0
    ctx.check(10, "BCap of a point does not depend on the box", variation < flat_tol, variation, flat_tol)


def _slab_growth(ctx: RunContext) -> None:
    dim = int(ctx.param("slab_dimension", 6))
    theta = get_jump_law(ctx.config.laws.jump, dim)
    margin = int(ctx.param("slab_margin", 2))
    pairs = []
    for r in ctx.param("slab_radii", [1, 2, 3, 4]):
        K = ball(BallKind.SLAB, float(r), m=1, d=dim)
        result = capacity(ctx, K, margin_box(K, margin), theta=theta)
        pairs.append((float(r), result.bcap_first))
        ctx.add_row(part="slab", set=f"B1({r})", size=len(K), dim=dim, radius=r,
                    bcap_first=result.bcap_first, bcap_last=result.bcap_last, error_bar=result.error_bar)
    fit = fit_power_law(pairs)
    slope_tol = ctx.tolerance("slab_slope", 0.3)
    ctx.check(10, "BCap(segment of length r) grows like r in d=6", fit.slope_within(1.0, slope_tol),
              fit.slope, [1.0, slope_tol])


@experiment("mt2", COLUMNS, criteria=(9, 10))
def run_mt2(ctx: RunContext) -> None:
    """Set laws of BCap and its growth on balls (d) and segments (d = 6)."""
    _set_laws(ctx)
    _ball_growth(ctx)
    if ctx.param("slabs", True):
        _slab_growth(ctx)

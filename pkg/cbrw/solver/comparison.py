"""
Comparison tools for the visiting recursion.

A supersolution v (v >= f(A v) off the target, v >= 1 on it) dominates every
Picard iterate, hence the visiting probabilities. The domination constant C
with f1((Ct) ^ 1) <= (C f2(t)) ^ 1 transfers visiting probabilities, and so
capacities, between two offspring laws up to the factor C.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from cbrw.errors import LawError
from cbrw.fields import MarkovOperator, ScalarField
from cbrw.killed_walk import SiteSet, site_mask
from cbrw.laws import JumpLaw, OffspringLaw

logger = logging.getLogger(__name__)

DOMINATION_C_MAX = 1e6
DOMINATION_GRID = 20_001
DOMINATION_SLACK = 1e-10


@dataclass
class SupersolutionReport:
    ok: bool
    worst_site: tuple[int, ...] | None
    margin: float

    def to_json(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "worst_site": list(self.worst_site) if self.worst_site is not None else None,
            "margin": self.margin,
        }


def supersolution_check(
    v: ScalarField,
    mu: OffspringLaw,
    theta: JumpLaw,
    domain: SiteSet = None,
    tol: float = 0.0,
) -> SupersolutionReport:
    """Check v(x) >= f(A v(x)) - tol at every site of `domain` (default: the whole box).

    Sites outside the box take v from its exterior policy.
    """
    box = v.box
    if np.any(v.values < -1e-15) or np.any(v.values > 1 + 1e-15):
        raise LawError("supersolution candidate must take values in [0, 1]")
    op = MarkovOperator(theta, box)
    av = np.clip(op.apply(v.values, op.boundary(v.exterior)), 0.0, 1.0)
    gap = v.values - mu.f_unchecked(av)
    mask = np.ones(box.shape, dtype=bool) if domain is None else site_mask(box, domain)
    if not np.any(mask):
        return SupersolutionReport(True, None, float("inf"))
    masked = np.where(mask, gap, np.inf)
    worst = np.unravel_index(int(np.argmin(masked)), box.shape)
    margin = float(masked[worst])
    site = tuple(int(c) for c in np.asarray(worst) + box.lower)
    return SupersolutionReport(margin >= -tol, site, margin)


def offspring_domination_constant(
    mu1: OffspringLaw,
    mu2: OffspringLaw,
    grid: int = DOMINATION_GRID,
    c_max: float = DOMINATION_C_MAX,
) -> float:
    """Smallest grid-certified C >= 1 with f1(min(Ct, 1)) <= min(C f2(t), 1) on [0, 1]."""
    for law in (mu1, mu2):
        if law.degenerate:
            raise LawError(f"{law.name}: domination needs a nondegenerate law")
    t = np.union1d(np.linspace(0.0, 1.0, grid)[1:], np.geomspace(1e-4, 1e-2, 200))
    f2 = mu2.f_unchecked(t)
    steps = int(np.ceil(1000 * np.log10(c_max))) + 1
    for C in np.geomspace(1.0, c_max, steps):
        lhs = mu1.f_unchecked(np.minimum(C * t, 1.0))
        rhs = np.minimum(C * f2, 1.0)
        if np.all(lhs <= rhs * (1.0 + DOMINATION_SLACK)):
            logger.info(f"domination constant for ({mu1.name}, {mu2.name}): C = {C:.4f}")
            return float(C)
    raise LawError(f"no domination constant C <= {c_max:g} for ({mu1.name}, {mu2.name})")

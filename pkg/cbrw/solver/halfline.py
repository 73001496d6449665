"""
Branching random walk on Z visiting the half-line Z- = {0, -1, -2, ...}.

p(x) = 1 for x <= 0 and p = f(A p) for x >= 1, computed by the Picard
recursion on {1..xmax}. Beyond xmax the profile is continued as
p(xmax) (xmax / x)^2, the proved decay rate; this closure is heuristic.
The quantity of interest is x^2 p(x), which stays bounded.

A bound of the same order is certified by the comparison principle: if
v = 1 ^ (c / x^2) satisfies v >= f(A v) on x >= 1 then p <= v.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from cbrw.errors import ConvergenceError, LawError
from cbrw.fields import write_convergence_log
from cbrw.laws import JumpLaw, OffspringLaw
from cbrw.solver.comparison import SupersolutionReport

logger = logging.getLogger(__name__)

HALFLINE_TOL = 1e-12
TAIL_LIMIT = 1e6
CERTIFY_X_CHECK = 2048


def left_tail_constant(theta: JumpLaw) -> float:
    """sup_k k^4 sum_{i <= -k} theta(i)."""
    steps = theta.steps[:, 0]
    worst = 0.0
    for k in range(1, int(max(-steps.min(), 0)) + 1):
        worst = max(worst, k**4 * float(theta.probs[steps <= -k].sum()))
    return worst


def _check_halfline_law(theta: JumpLaw) -> float:
    if theta.dim != 1:
        raise LawError(f"half-line solver needs a one-dimensional jump law, got d={theta.dim}")
    if abs(float(theta.mean[0])) > 1e-12:
        raise LawError(f"{theta.name}: half-line jump law must have zero mean")
    tail = left_tail_constant(theta)
    if tail > TAIL_LIMIT:
        raise LawError(f"{theta.name}: left tail constant {tail:.3e} violates the k^-4 tail condition")
    return tail


class _HalflineOperator:
    """(A v)(x) for x in 1..xmax with v = 1 on Z- and the x^-2 closure on the right."""

    def __init__(self, theta: JumpLaw, xmax: int):
        self.steps = theta.steps[:, 0].astype(np.int64)
        self.probs = theta.probs
        self.reach = int(np.max(np.abs(self.steps))) if len(self.steps) else 0
        self.xmax = xmax
        right = np.arange(xmax + 1, xmax + self.reach + 1, dtype=float)
        self.decay = (xmax / right) ** 2

    def apply(self, v: np.ndarray) -> np.ndarray:
        R = self.reach
        padded = np.concatenate([np.ones(R), v, v[-1] * self.decay])
        out = np.zeros(self.xmax)
        for e, w in zip(self.steps, self.probs):
            out += w * padded[R + e : R + e + self.xmax]
        return out


@dataclass
class HalflineProfile:
    x: np.ndarray
    p: np.ndarray
    generations: int
    converged: bool
    residual: float
    tail_constant: float
    history: list[float] = field(default_factory=list, repr=False)

    @property
    def xmax(self) -> int:
        return int(self.x[-1])

    def value_at(self, x: int) -> float:
        if x <= 0:
            return 1.0
        if x > self.xmax:
            return float(self.p[-1] * (self.xmax / x) ** 2)
        return float(self.p[x - 1])

    @property
    def scaled(self) -> np.ndarray:
        """x^2 p(x)."""
        return self.x.astype(float) ** 2 * self.p

    def sup_scaled(self, lo: int = 1, hi: int | None = None) -> float:
        window = self._window(lo, hi)
        return float(np.max(self.scaled[window]))

    def plateau(self, lo: int, hi: int | None = None) -> dict[str, float]:
        """min, max and max/min of x^2 p(x) over lo <= x <= hi."""
        values = self.scaled[self._window(lo, hi)]
        low, high = float(np.min(values)), float(np.max(values))
        return {"min": low, "max": high, "ratio": high / low if low > 0 else float("inf")}

    def _window(self, lo: int, hi: int | None) -> np.ndarray:
        hi = self.xmax if hi is None else hi
        window = (self.x >= lo) & (self.x <= hi)
        if not np.any(window):
            raise ValueError(f"window [{lo}, {hi}] misses 1..{self.xmax}")
        return window

    def to_json(self) -> dict[str, Any]:
        return {
            "xmax": self.xmax,
            "generations": self.generations,
            "converged": self.converged,
            "residual": self.residual,
            "tail_constant": self.tail_constant,
            "sup_x2p": self.sup_scaled(),
        }

    def to_csv(self, path: str | Path) -> None:
        lines = ["x,p,x2p"]
        lines += [f"{int(x)},{p:.17g},{s:.17g}" for x, p, s in zip(self.x, self.p, self.scaled)]
        Path(path).write_text("\n".join(lines) + "\n")

    def write_convergence_log(self, path: str | Path) -> None:
        write_convergence_log(path, self.history)


def solve_halfline(
    mu: OffspringLaw,
    theta: JumpLaw,
    xmax: int,
    n_gens: int | None = None,
    tol: float = HALFLINE_TOL,
    max_iters: int | None = None,
) -> HalflineProfile:
    """p_n from p_0 = 1_{Z-}: exactly n_gens generations, or until the update is below tol."""
    if xmax < 2:
        raise ValueError("xmax must be at least 2")
    tail = _check_halfline_law(theta)
    op = _HalflineOperator(theta, xmax)
    limit = n_gens if n_gens is not None else (max_iters or 100 * xmax * xmax)
    logger.info(f"half-line solve: {mu.name}, {theta.name}, xmax={xmax}, "
                f"{'n_gens=' + str(n_gens) if n_gens is not None else f'tol={tol:g}'}")
    logger.warning(f"half-line profile beyond x={xmax} uses the heuristic x^-2 closure")

    p = np.zeros(xmax)
    history: list[float] = []
    update = float("inf")
    generations = 0
    for generations in range(1, limit + 1):
        new = mu.f_unchecked(np.clip(op.apply(p), 0.0, 1.0))
        drop = float(np.max(p - new))
        if drop > 1e-14:
            raise ConvergenceError("half-line iterates are not monotone", drop, generations)
        update = float(np.max(new - p))
        history.append(update)
        p = new
        if generations % 10_000 == 0:
            logger.debug(f"half-line generation {generations}: update {update:.3e}")
        if n_gens is None and update < tol:
            break
    converged = update < tol
    if n_gens is None and not converged:
        raise ConvergenceError("half-line recursion did not converge", update, limit)

    profile = HalflineProfile(
        x=np.arange(1, xmax + 1),
        p=p,
        generations=generations,
        converged=converged,
        residual=update,
        tail_constant=tail,
        history=history,
    )
    logger.info(f"half-line: {generations} generations, sup x^2 p(x) = {profile.sup_scaled():.4f}")
    return profile


def halfline_supersolution_check(
    v: Callable[[np.ndarray], np.ndarray],
    mu: OffspringLaw,
    theta: JumpLaw,
    x_check: int = CERTIFY_X_CHECK,
    tol: float = 0.0,
) -> SupersolutionReport:
    """v(x) >= f(A v(x)) for 1 <= x <= x_check, with v = 1 on Z- imposed."""
    _check_halfline_law(theta)
    steps = theta.steps[:, 0].astype(np.int64)
    xs = np.arange(1, x_check + 1)

    def value(points: np.ndarray) -> np.ndarray:
        out = np.ones(points.shape)
        positive = points >= 1
        out[positive] = np.asarray(v(points[positive]), dtype=float)
        return out

    vx = value(xs)
    if np.any(vx < 0) or np.any(vx > 1 + 1e-15):
        raise LawError("supersolution candidate must take values in [0, 1]")
    av = sum(w * value(xs + e) for e, w in zip(steps, theta.probs))
    gap = vx - mu.f_unchecked(np.clip(av, 0.0, 1.0))
    worst = int(np.argmin(gap))
    margin = float(gap[worst])
    return SupersolutionReport(margin >= -tol, (int(xs[worst]),), margin)


def inverse_square(c: float) -> Callable[[np.ndarray], np.ndarray]:
    """x -> min(1, c / x^2)."""
    return lambda x: np.minimum(1.0, c / np.asarray(x, dtype=float) ** 2)


@dataclass
class HalflineCertificate:
    c: float
    report: SupersolutionReport
    x_check: int

    def to_json(self) -> dict[str, Any]:
        return {"c": self.c, "x_check": self.x_check, **self.report.to_json()}


def certify_halfline_constant(
    mu: OffspringLaw,
    theta: JumpLaw,
    c_grid: np.ndarray | None = None,
    x_check: int = CERTIFY_X_CHECK,
) -> HalflineCertificate:
    """Smallest c on the grid with 1 ^ (c / x^2) a supersolution on 1..x_check."""
    grid = np.geomspace(1.0, 1e4, 321) if c_grid is None else np.sort(np.asarray(c_grid, dtype=float))
    for c in grid:
        report = halfline_supersolution_check(inverse_square(float(c)), mu, theta, x_check)
        if report.ok:
            logger.info(f"certified p(x) <= 1 ^ ({c:.4g}/x^2) on 1..{x_check}")
            return HalflineCertificate(float(c), report, x_check)
    raise LawError(f"no c in [{grid[0]:g}, {grid[-1]:g}] certifies an inverse-square supersolution")

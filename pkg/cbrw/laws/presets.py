"""
Named law presets and parsing of law specs from configs.

A law spec is either a preset name ("binary", "srw", ...), a mapping
{"preset": name, **params}, or an explicit table:

    offspring: {pmf: {0: 0.5, 2: 0.5}}
    jump:      {pmf: [[[1, 0, 0, 0, 0], 0.1], [[-1, 0, 0, 0, 0], 0.1], ...]}
"""

from __future__ import annotations

from collections.abc import Callable
from typing import Any

import numpy as np
from scipy.stats import poisson as poisson_dist

from cbrw.errors import LawError
from cbrw.laws.jump import JumpLaw
from cbrw.laws.offspring import TRUNCATION_MASS, CriticalGeometric, OffspringLaw

# ---------------------------------------------------------------------------
# Offspring presets
# ---------------------------------------------------------------------------


def binary() -> OffspringLaw:
    return OffspringLaw([0.5, 0.0, 0.5], name="binary")


def geometric() -> OffspringLaw:
    return CriticalGeometric()


def critical_poisson() -> OffspringLaw:
    return OffspringLaw.from_pmf_function(lambda k: float(poisson_dist.pmf(k, 1.0)), name="poisson")


def delta1() -> OffspringLaw:
    return OffspringLaw([0.0, 1.0], name="delta1")


OFFSPRING_PRESETS: dict[str, tuple[Callable[[], OffspringLaw], str]] = {
    "binary": (binary, "{0: 1/2, 2: 1/2}, sigma^2 = 1"),
    "geometric": (geometric, "mu(k) = 2^-(k+1), sigma^2 = 2"),
    "poisson": (critical_poisson, "Poisson(1), sigma^2 = 1"),
    "delta1": (delta1, "mu(1) = 1, the random-walk reduction"),
}


def get_offspring_law(spec: str | dict[str, Any] | OffspringLaw) -> OffspringLaw:
    if isinstance(spec, OffspringLaw):
        return spec
    if isinstance(spec, str):
        if spec not in OFFSPRING_PRESETS:
            raise LawError(f"unknown offspring preset '{spec}'; known: {sorted(OFFSPRING_PRESETS)}")
        return OFFSPRING_PRESETS[spec][0]()
    if isinstance(spec, dict):
        if "preset" in spec:
            return get_offspring_law(str(spec["preset"]))
        if "pmf" in spec:
            table = {int(k): float(v) for k, v in dict(spec["pmf"]).items()}
            if not table or min(table) < 0:
                raise LawError("offspring pmf keys must be nonnegative integers")
            probs = np.zeros(max(table) + 1)
            for k, v in table.items():
                probs[k] = v
            return OffspringLaw(probs, name=str(spec.get("name", "table")))
    raise LawError(f"cannot build an offspring law from {spec!r}")


# ---------------------------------------------------------------------------
# Jump presets
# ---------------------------------------------------------------------------


def _axis_steps(d: int, length: int) -> list[list[int]]:
    steps = []
    for axis in range(d):
        for sign in (1, -1):
            step = [0] * d
            step[axis] = sign * length
            steps.append(step)
    return steps


def srw(d: int) -> JumpLaw:
    steps = _axis_steps(d, 1)
    return JumpLaw(steps, [1.0 / (2 * d)] * len(steps), name="srw")


def lazy_srw(d: int) -> JumpLaw:
    steps = [[0] * d] + _axis_steps(d, 1)
    probs = [0.5] + [1.0 / (4 * d)] * (2 * d)
    return JumpLaw(steps, probs, name="lazy-srw")


def axis_power(d: int, alpha: float | None = None) -> JumpLaw:
    """Symmetric axis jumps theta(+-k e_i) proportional to k^-(alpha+1).

    theta(|x| > r) decays like r^-alpha, so alpha >= d keeps the weak L^d
    tail condition. The table is cut at mass 1 - 1e-12 and renormalised.
    """
    alpha = float(d + 1 if alpha is None else alpha)
    if alpha < d:
        raise LawError(f"axis-power exponent {alpha} < d={d} violates the tail condition")
    weights = []
    k = 1
    zeta = float(np.sum(np.arange(1, 200_000, dtype=float) ** -(alpha + 1)))
    total = 0.0
    while total < TRUNCATION_MASS * zeta:
        w = k ** -(alpha + 1)
        weights.append(w)
        total += w
        k += 1
    steps: list[list[int]] = []
    probs: list[float] = []
    for length, w in enumerate(weights, start=1):
        for step in _axis_steps(d, length):
            steps.append(step)
            probs.append(w)
    probs_arr = np.asarray(probs) / np.sum(probs)
    return JumpLaw(steps, probs_arr, name=f"axis-power({alpha:g})")


def pm1(d: int = 1) -> JumpLaw:
    if d != 1:
        raise LawError("pm1 is a one-dimensional law")
    return JumpLaw([[1], [-1]], [0.5, 0.5], name="pm1")


def lazy_pm1(d: int = 1) -> JumpLaw:
    if d != 1:
        raise LawError("lazy-pm1 is a one-dimensional law")
    return JumpLaw([[0], [1], [-1]], [0.5, 0.25, 0.25], name="lazy-pm1")


JUMP_PRESETS: dict[str, tuple[Callable[..., JumpLaw], str]] = {
    "srw": (srw, "nearest-neighbour simple random walk, Q = I/d"),
    "lazy-srw": (lazy_srw, "stay with prob 1/2, else a nearest-neighbour step"),
    "axis-power": (axis_power, "heavy-tailed symmetric axis jumps (param alpha)"),
    "pm1": (pm1, "one-dimensional +-1 walk"),
    "lazy-pm1": (lazy_pm1, "one-dimensional lazy +-1 walk"),
}


def get_jump_law(spec: str | dict[str, Any] | JumpLaw, d: int) -> JumpLaw:
    if isinstance(spec, JumpLaw):
        if spec.dim != d:
            raise LawError(f"jump law has dimension {spec.dim}, expected {d}")
        return spec
    if isinstance(spec, str):
        if spec not in JUMP_PRESETS:
            raise LawError(f"unknown jump preset '{spec}'; known: {sorted(JUMP_PRESETS)}")
        return JUMP_PRESETS[spec][0](d)
    if isinstance(spec, dict):
        if "preset" in spec:
            name = str(spec["preset"])
            if name not in JUMP_PRESETS:
                raise LawError(f"unknown jump preset '{name}'; known: {sorted(JUMP_PRESETS)}")
            params = {k: v for k, v in spec.items() if k != "preset"}
            return JUMP_PRESETS[name][0](d, **params)
        if "pmf" in spec:
            rows = list(spec["pmf"])
            steps = [list(map(int, step)) for step, _ in rows]
            probs = [float(p) for _, p in rows]
            if any(len(s) != d for s in steps):
                raise LawError(f"jump pmf steps must have dimension {d}")
            return JumpLaw(steps, probs, name=str(spec.get("name", "table")), declared_Q=spec.get("q"))
    raise LawError(f"cannot build a jump law from {spec!r}")

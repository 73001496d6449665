"""Log-log regression for scaling exponents."""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.stats import linregress

from cbrw.errors import CbrwError

logger = logging.getLogger(__name__)

MIN_POINTS = 4


class FitError(CbrwError):
    """Power-law fit on invalid data."""


@dataclass
class FitResult:
    slope: float
    intercept: float  # log(value) at log(scale) = 0
    stderr: float
    r2: float
    n_points: int

    @property
    def prefactor(self) -> float:
        return float(np.exp(self.intercept))

    def slope_within(self, expected: float, tolerance: float) -> bool:
        return abs(self.slope - expected) <= tolerance

    def to_json(self) -> dict[str, Any]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "r2": self.r2,
            "n_points": self.n_points,
        }


def fit_power_law(pairs: Iterable[tuple[float, float]]) -> FitResult:
    """Least squares on (log scale, log value): value ~ exp(intercept) scale^slope."""
    data = np.asarray(list(pairs), dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or len(data) < MIN_POINTS:
        raise FitError(f"power-law fit needs at least {MIN_POINTS} (scale, value) pairs, got {len(data)}")
    scales, values = data[:, 0], data[:, 1]
    if np.any(scales <= 0):
        raise FitError("power-law fit needs positive scales")
    if np.any(values <= 0):
        raise FitError(f"power-law fit needs positive values, got min {values.min():g}")
    if np.unique(scales).size < 2:
        raise FitError("power-law fit needs at least two distinct scales")
    fit = linregress(np.log(scales), np.log(values))
    stderr = float(fit.stderr)
    if not np.isfinite(stderr):
        raise FitError("power-law fit has no finite standard error")
    result = FitResult(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        stderr=stderr,
        r2=float(fit.rvalue**2),
        n_points=len(data),
    )
    logger.info(f"power-law fit: slope {result.slope:.4f} +- {result.stderr:.4f} (r^2 {result.r2:.5f}, n={len(data)})")
    return result

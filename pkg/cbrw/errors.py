"""
Exception hierarchy for cbrw.

Every error raised by the library derives from CbrwError so callers (and the
CLI) can catch one type. Solver errors carry the numbers needed to act on
them: the residual reached, the quadrature error estimate, the tail bound.
"""

from __future__ import annotations


class CbrwError(Exception):
    """Base class for all cbrw errors."""


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------


class LatticeError(CbrwError):
    """Invalid lattice object (point, box or set)."""


class EmptySetError(LatticeError):
    """A set that must be nonempty came out empty."""


class DuplicatePointError(LatticeError):
    """A point was listed twice when building a set."""


class DegenerateCovarianceError(LatticeError):
    """Covariance matrix is singular or not positive definite."""


class BoxError(LatticeError):
    """Point outside a box, or box too large to index."""


# ---------------------------------------------------------------------------
# Laws
# ---------------------------------------------------------------------------


class LawError(CbrwError):
    """Invalid offspring or jump law, or an argument outside its domain."""


class QuadratureError(CbrwError):
    """Numerical integration did not reach the requested accuracy."""

    def __init__(self, message: str, estimate: float):
        super().__init__(f"{message} (error estimate {estimate:.3e})")
        self.estimate = estimate


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------


class ConvergenceError(CbrwError):
    """Iterative solver stopped at max_iters above tolerance."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


class TailBoundError(CbrwError):
    """Truncated series tail exceeds tolerance."""

    def __init__(self, message: str, bound: float):
        super().__init__(f"{message} (tail bound {bound:.3e}); increase the horizon")
        self.bound = bound


class InconsistentCapacityError(CbrwError):
    """First- and last-visit capacities disagree beyond the truncation error."""

    def __init__(self, gap: float, error_bar: float):
        super().__init__(
            f"inconsistent capacity: gap {gap:.3e} exceeds 5x error bar {error_bar:.3e}"
        )
        self.gap = gap
        self.error_bar = error_bar


# ---------------------------------------------------------------------------
# Sampling and runs
# ---------------------------------------------------------------------------


class SamplingError(CbrwError):
    """Monte Carlo run cannot produce an estimate."""


class BudgetExceeded(CbrwError):
    """Experiment ran past twice its declared wall-clock budget."""

    def __init__(self, elapsed: float, budget: float):
        super().__init__(f"budget exceeded: {elapsed:.1f}s > 2 x {budget:.1f}s")
        self.elapsed = elapsed
        self.budget = budget

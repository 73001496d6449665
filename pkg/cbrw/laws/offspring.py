"""
Offspring laws and their derived measures.

CountLaw is any pmf on {0, 1, 2, ...}; OffspringLaw adds the criticality
requirement (mean one) and the generating-function quantities used by the
visiting-probability recursion:

    f(t) = 1 - sum_k mu(k) (1 - t)^k

with f(0) = 0, f'(0) = 1, f'(1) = mu(1) and f concave on [0, 1].

The adjoint measure mu~(i) = sum_{j > i} mu(j) is the offspring law of
bush roots; it has total mass 1 and mean sigma^2 / 2.
"""

from __future__ import annotations

from collections.abc import Callable
from functools import cached_property
from typing import Any

import numpy as np
from numpy.polynomial import polynomial as P

from cbrw.errors import LawError
from cbrw.laws.alias import AliasTable

PMF_MASS_TOL = 1e-12
TRUNCATION_MASS = 1.0 - 1e-12


def truncate_pmf(
    pmf: Callable[[int], float], mass: float = TRUNCATION_MASS, max_atoms: int = 100_000
) -> tuple[np.ndarray, float]:
    """Tabulate pmf(0), pmf(1), ... until the retained mass reaches `mass`.

    The missing mass is added to the largest retained atom. Returns the
    table and the first-moment shift caused by truncation.
    """
    atoms: list[float] = []
    total = 0.0
    while total < mass:
        if len(atoms) >= max_atoms:
            raise LawError(f"pmf did not reach mass {mass} within {max_atoms} atoms")
        value = float(pmf(len(atoms)))
        if value < 0:
            raise LawError(f"negative probability at k={len(atoms)}")
        atoms.append(value)
        total += value
    table = np.asarray(atoms)
    # First moment carried by the discarded tail, estimated from further terms.
    k = len(table)
    tail_mean = 0.0
    for j in range(k, k + 1000):
        term = j * float(pmf(j))
        tail_mean += term
        if term < 1e-18:
            break
    defect = 1.0 - table.sum()
    largest = int(np.argmax(table))
    table[largest] += defect
    shift = abs(tail_mean - largest * defect)
    return table, shift


class CountLaw:
    """A pmf on {0, 1, ..., n} stored as a table."""

    def __init__(self, probs: np.ndarray | list[float], name: str = "table", tol: float = PMF_MASS_TOL):
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 1 or len(probs) == 0:
            raise LawError(f"{name}: pmf must be a nonempty 1-D table")
        if np.any(probs < 0):
            raise LawError(f"{name}: negative probabilities")
        total = probs.sum()
        if abs(total - 1.0) > tol * max(1.0, len(probs)):
            raise LawError(f"{name}: probabilities sum to {total!r}, not 1")
        probs = probs / total
        last = int(np.flatnonzero(probs)[-1])
        self.probs = probs[: last + 1]
        self.name = name

    # -- moments ------------------------------------------------------------

    @property
    def max_support(self) -> int:
        return len(self.probs) - 1

    @cached_property
    def mean(self) -> float:
        return float(np.arange(len(self.probs)) @ self.probs)

    @cached_property
    def variance(self) -> float:
        k = np.arange(len(self.probs))
        return float(((k - self.mean) ** 2) @ self.probs)

    def pmf(self, k: int) -> float:
        return float(self.probs[k]) if 0 <= k < len(self.probs) else 0.0

    # -- generating function sum_k mu(k) s^k --------------------------------

    def phi(self, s: np.ndarray | float) -> np.ndarray | float:
        return P.polyval(s, self.probs)

    def phi_prime(self, s: np.ndarray | float) -> np.ndarray | float:
        return P.polyval(s, P.polyder(self.probs)) if len(self.probs) > 1 else 0.0 * np.asarray(s)

    def phi_second(self, s: np.ndarray | float) -> np.ndarray | float:
        return P.polyval(s, P.polyder(self.probs, 2)) if len(self.probs) > 2 else 0.0 * np.asarray(s)

    # -- sampling -----------------------------------------------------------

    @cached_property
    def alias(self) -> AliasTable:
        return AliasTable.build(self.probs)

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray | int:
        return self.alias.sample(rng, size)

    def to_json(self) -> dict[str, Any]:
        return {"name": self.name, "pmf": {int(k): float(p) for k, p in enumerate(self.probs) if p > 0}}

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r}, support=0..{self.max_support})"


class OffspringLaw(CountLaw):
    """Critical offspring law mu (mean one)."""

    def __init__(
        self,
        probs: np.ndarray | list[float],
        name: str = "table",
        mean_tol: float = PMF_MASS_TOL,
    ):
        super().__init__(probs, name=name)
        if abs(self.mean - 1.0) > mean_tol * max(1.0, self.max_support):
            raise LawError(f"{name}: offspring law is not critical (mean {self.mean!r})")

    @property
    def sigma2(self) -> float:
        return self.variance

    @property
    def degenerate(self) -> bool:
        """True for mu = delta_1, the random-walk reduction case."""
        return self.sigma2 < 1e-14

    # -- f(t) ---------------------------------------------------------------

    @staticmethod
    def _check_unit(t: np.ndarray | float) -> None:
        arr = np.asarray(t)
        if np.any(arr < -1e-15) or np.any(arr > 1 + 1e-15) or np.any(np.isnan(arr)):
            raise LawError("f(t) is defined for t in [0, 1]")

    def f(self, t: np.ndarray | float) -> np.ndarray | float:
        self._check_unit(t)
        return 1.0 - self.phi(1.0 - np.asarray(t, dtype=float))

    def f_prime(self, t: np.ndarray | float) -> np.ndarray | float:
        self._check_unit(t)
        return self.phi_prime(1.0 - np.asarray(t, dtype=float))

    def f_second(self, t: np.ndarray | float) -> np.ndarray | float:
        self._check_unit(t)
        return -self.phi_second(1.0 - np.asarray(t, dtype=float))

    def f_unchecked(self, t: np.ndarray) -> np.ndarray:
        """f on arrays already known to lie in [0, 1] (solver inner loops)."""
        return 1.0 - self.phi(1.0 - t)

    def adjoint(self) -> CountLaw:
        return adjoint_measure(self)

    @classmethod
    def from_pmf_function(cls, pmf: Callable[[int], float], name: str) -> OffspringLaw:
        table, shift = truncate_pmf(pmf)
        return cls(table, name=name, mean_tol=PMF_MASS_TOL + shift)


class CriticalGeometric(OffspringLaw):
    """mu(k) = 2^{-(k+1)}: mean 1, sigma^2 = 2, self-adjoint.

    The generating function and tail sums are exact; the stored table (used
    for sampling) is truncated at mass 1 - 1e-12.
    """

    def __init__(self) -> None:
        table, shift = truncate_pmf(lambda k: 0.5 ** (k + 1))
        super().__init__(table, name="geometric", mean_tol=PMF_MASS_TOL + shift)

    @property
    def mean(self) -> float:  # type: ignore[override]
        return 1.0

    @property
    def variance(self) -> float:  # type: ignore[override]
        return 2.0

    def phi(self, s: np.ndarray | float) -> np.ndarray | float:
        return 1.0 / (2.0 - np.asarray(s, dtype=float))

    def phi_prime(self, s: np.ndarray | float) -> np.ndarray | float:
        return 1.0 / (2.0 - np.asarray(s, dtype=float)) ** 2

    def phi_second(self, s: np.ndarray | float) -> np.ndarray | float:
        return 2.0 / (2.0 - np.asarray(s, dtype=float)) ** 3

    def adjoint(self) -> CountLaw:
        return self


def adjoint_measure(mu: CountLaw) -> CountLaw:
    """mu~(i) = sum_{j > i} mu(j)."""
    if isinstance(mu, CriticalGeometric):
        return mu
    if abs(mu.mean - 1.0) > 1e-9:
        raise LawError(f"adjoint measure needs a critical law, mean is {mu.mean!r}")
    tails = np.cumsum(mu.probs[::-1])[::-1][1:]
    if len(tails) == 0:
        raise LawError("adjoint of delta_0 is undefined")
    return CountLaw(tails, name=f"adjoint({mu.name})", tol=1e-9)


def offspring_gf(mu: OffspringLaw, t: float) -> float:
    """f(t) = 1 - sum_k mu(k)(1 - t)^k."""
    return float(mu.f(t))


def _field_value(field: Any, x: Any) -> float:
    if hasattr(field, "value_at"):
        return float(field.value_at(x))
    return float(field)


def position_offspring(mu: OffspringLaw, rp_field: Any, r_field: Any, x: Any = None) -> CountLaw:
    """The position-dependent law mu_x.

    mu_x(m) = sum_{l >= 0} mu(l + m + 1) r~(x)^l / (1 - r(x)), where
    r~ = 1 - s~ is the one-child non-visit probability and r is the
    adjoint-snake visit probability. Fields may be ScalarFields (evaluated
    at x) or plain numbers.
    """
    r_tilde = _field_value(rp_field, x)
    r = _field_value(r_field, x)
    if r >= 1.0 - 1e-15:
        raise LawError(f"r(x) = 1 at {x}: site is effectively inside K")
    if not 0.0 <= r_tilde <= 1.0 + 1e-12:
        raise LawError(f"r~(x) = {r_tilde} outside [0, 1]")

    probs = mu.probs
    n = len(probs) - 1
    if n == 0:
        raise LawError("position-dependent law of delta_0 is undefined")
    # Horner from the top: h[m] = mu(m + 1) + r~ h[m + 1].
    h = np.zeros(n)
    h[n - 1] = probs[n]
    for m in range(n - 2, -1, -1):
        h[m] = probs[m + 1] + r_tilde * h[m + 1]
    values = h / (1.0 - r)
    return CountLaw(values, name=f"mu_x({mu.name})", tol=1e-10)


def certified_a(mu: OffspringLaw, grid_size: int = 4000) -> float:
    """Largest grid-certified a in (0, 1/2) with f(t) <= t - a t^2 on [0, 1]
    and t (1 + a t) <= 1 on [0, 1 - mu(0)]."""
    if mu.degenerate:
        raise LawError("no quadratic gap for the degenerate law")
    t = np.linspace(0.0, 1.0, grid_size + 1)[1:]
    gap = np.min((t - mu.f(t)) / t**2)
    upper = 1.0 - mu.pmf(0)
    s = t[t <= upper]
    cap = np.min((1.0 - s) / s**2) if len(s) else np.inf
    a = float(min(gap, cap, np.nextafter(0.5, 0.0)))
    if a <= 0:
        raise LawError(f"{mu.name}: no positive a certified on the grid")
    return a

"""
Jump laws theta on Z^d.

A JumpLaw is a finite table of steps and probabilities. Parametric heavy
tails are tabulated up to mass 1 - 1e-12 and renormalised before they get
here (see presets). The covariance Q is always recomputed from the table.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from math import gcd
from typing import Any

import numpy as np

from cbrw.errors import LawError
from cbrw.lattice import ThetaNorm
from cbrw.laws.alias import AliasTable

logger = logging.getLogger(__name__)

PMF_MASS_TOL = 1e-12
MEAN_TOL = 1e-12
COVARIANCE_TOL = 1e-9
# Rows fed to the Smith normal form; the most probable steps are used.
SUBGROUP_ROWS = 64


class JumpLaw:
    """Step distribution theta with finite support."""

    def __init__(
        self,
        steps: np.ndarray | list[list[int]],
        probs: np.ndarray | list[float],
        name: str = "table",
        declared_Q: np.ndarray | None = None,
    ):
        steps = np.atleast_2d(np.asarray(steps, dtype=np.int64))
        probs = np.asarray(probs, dtype=float)
        if steps.shape[0] != probs.shape[0] or probs.ndim != 1 or len(probs) == 0:
            raise LawError(f"{name}: steps and probabilities must align")
        if np.any(probs < 0):
            raise LawError(f"{name}: negative probabilities")
        total = probs.sum()
        if abs(total - 1.0) > PMF_MASS_TOL * max(1.0, len(probs)):
            raise LawError(f"{name}: probabilities sum to {total!r}, not 1")
        keep = probs > 0
        steps, probs = steps[keep], probs[keep] / total
        if len({tuple(s) for s in steps.tolist()}) != len(steps):
            raise LawError(f"{name}: duplicate steps in the table")

        self.steps = steps
        self.probs = probs
        self.name = name
        self._norm = ThetaNorm(self.Q)
        if declared_Q is not None:
            mismatch = float(np.max(np.abs(np.asarray(declared_Q, dtype=float) - self.Q)))
            if mismatch > COVARIANCE_TOL:
                raise LawError(f"{name}: declared Q differs from the pmf covariance by {mismatch:.3e}")

    @classmethod
    def from_table(cls, table: dict[tuple[int, ...], float], name: str = "table") -> JumpLaw:
        steps = [list(k) for k in table]
        return cls(steps, list(table.values()), name=name)

    # -- geometry -----------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.steps.shape[1]

    @property
    def size(self) -> int:
        return len(self.probs)

    @cached_property
    def mean(self) -> np.ndarray:
        return self.probs @ self.steps

    @cached_property
    def Q(self) -> np.ndarray:
        centred = self.steps - self.mean
        return np.einsum("k,ki,kj->ij", self.probs, centred, centred)

    @property
    def norm(self) -> ThetaNorm:
        return self._norm

    @cached_property
    def range(self) -> int:
        """Largest sup-norm step length."""
        return int(np.max(np.abs(self.steps)))

    @cached_property
    def symmetric(self) -> bool:
        table = self.as_dict()
        return all(abs(table.get(tuple(-s for s in k), 0.0) - p) < 1e-15 for k, p in table.items())

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(c) for c in s): float(p) for s, p in zip(self.steps, self.probs)}

    def prob_of(self, step: tuple[int, ...]) -> float:
        return self._lookup.get(tuple(int(c) for c in step), 0.0)

    @cached_property
    def _lookup(self) -> dict[tuple[int, ...], float]:
        return self.as_dict()

    def reversed(self) -> JumpLaw:
        """theta~(x) = theta(-x)."""
        return JumpLaw(-self.steps, self.probs.copy(), name=f"reversed({self.name})")

    # -- tails --------------------------------------------------------------

    def tail_constant(self) -> float:
        """sup_{r >= 1} r^d theta(|x| > r) for the tabulated law."""
        lengths = np.linalg.norm(self.steps.astype(float), axis=1)
        radii = np.unique(np.concatenate([[1.0], lengths[lengths >= 1.0]]))
        best = 0.0
        for lo, hi in zip(radii[:-1], radii[1:]):
            mass = float(self.probs[lengths > lo].sum())
            best = max(best, hi**self.dim * mass)
        return best

    # -- sampling -----------------------------------------------------------

    @cached_property
    def alias(self) -> AliasTable:
        return AliasTable.build(self.probs)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.steps[self.alias.sample(rng, size)]

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "pmf": [[s.tolist(), float(p)] for s, p in zip(self.steps, self.probs)],
        }

    def __repr__(self) -> str:
        return f"JumpLaw({self.name!r}, d={self.dim}, support={self.size})"


@dataclass
class JumpReport:
    """Outcome of validate_jump. Report only: nothing here raises."""

    mean_residual: float
    tail_constant: float
    subgroup: str  # "generates Z^d", "strict subgroup" or "unknown"
    coordinate_gcds: list[int] = field(default_factory=list)
    bipartite: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def zero_mean(self) -> bool:
        return self.mean_residual <= MEAN_TOL

    @property
    def passed(self) -> bool:
        return self.zero_mean and self.subgroup != "strict subgroup"

    def to_json(self) -> dict[str, Any]:
        return {
            "mean_residual": self.mean_residual,
            "zero_mean": self.zero_mean,
            "tail_constant": self.tail_constant,
            "subgroup": self.subgroup,
            "coordinate_gcds": self.coordinate_gcds,
            "bipartite": self.bipartite,
            "passed": self.passed,
            "notes": list(self.notes),
        }


def _subgroup_check(theta: JumpLaw) -> str:
    """Does the support generate Z^d? Exact for the rows examined."""
    from sympy import Matrix
    from sympy.matrices.normalforms import smith_normal_form
    from sympy.polys.domains import ZZ

    order = np.argsort(-theta.probs, kind="stable")[:SUBGROUP_ROWS]
    rows = theta.steps[order].tolist()
    if len(rows) < theta.dim:
        return "strict subgroup"
    try:
        snf = smith_normal_form(Matrix(rows), domain=ZZ)
    except Exception as e:  # sympy versions differ on rectangular input
        logger.warning(f"Smith normal form unavailable ({e}); subgroup check skipped")
        return "unknown"
    diagonal = [abs(int(snf[i, i])) for i in range(min(snf.shape))]
    if len(diagonal) >= theta.dim and all(v == 1 for v in diagonal[: theta.dim]):
        return "generates Z^d"
    if theta.size > SUBGROUP_ROWS:
        return "unknown"
    return "strict subgroup"


def validate_jump(theta: JumpLaw) -> JumpReport:
    """Zero-mean residual, empirical tail constant and subgroup heuristics."""
    residual = float(np.max(np.abs(theta.mean)))
    gcds = [0] * theta.dim
    for step in theta.steps.tolist():
        gcds = [gcd(g, abs(c)) for g, c in zip(gcds, step)]
    bipartite = bool(np.all(theta.steps.sum(axis=1) % 2 == 1))
    report = JumpReport(
        mean_residual=residual,
        tail_constant=theta.tail_constant(),
        subgroup=_subgroup_check(theta),
        coordinate_gcds=gcds,
        bipartite=bipartite,
    )
    if not report.zero_mean:
        report.notes.append(f"mean {theta.mean.tolist()} is not zero")
    if any(g != 1 for g in gcds):
        report.notes.append(f"coordinate gcds {gcds} differ from 1")
    if bipartite:
        report.notes.append("every step has odd coordinate sum (periodic walk)")
    if report.subgroup == "unknown":
        report.notes.append("subgroup condition is advisory for this law")
    return report

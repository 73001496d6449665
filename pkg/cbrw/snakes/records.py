"""Value types shared by the snake samplers."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from cbrw.errors import LatticeError
from cbrw.lattice import Point, SetK


class SnakeKind(str, Enum):
    """Root law and root counting of a finite snake."""

    SNAKE = "snake"  # root offspring mu
    ADJOINT = "adjoint"  # root offspring mu~
    ONE_CHILD = "one-child"  # root has exactly one child
    STRICT = "strict"  # mu root, visits strictly after time zero
    ADJOINT_STRICT = "adjoint-strict"  # mu~ root, visits strictly after time zero

    @property
    def skips_root(self) -> bool:
        return self in (SnakeKind.STRICT, SnakeKind.ADJOINT_STRICT)


class InfiniteVariant(str, Enum):
    INFINITE = "infinite"  # spine theta, adjoint bushes
    REVERSED = "reversed"  # spine theta~, adjoint bushes
    INVARIANT = "invariant"  # spine theta~, full mu tree at the root

    @property
    def spine_sign(self) -> int:
        return 1 if self is InfiniteVariant.INFINITE else -1


class Censoring(str, Enum):
    NONE = "none"
    SIZE_CAP = "size_cap"
    SPINE_CAP = "spine_cap"


@dataclass(frozen=True)
class Caps:
    """Resource limits for one sample.

    far_radius stops an infinite snake once its spine leaves the theta-norm
    ball of that radius; None picks a default from the target set and the
    start when sampling. An infinite snake cannot start outside it.

    prune_radius stops expanding lineages outside the ball of that radius.
    A pruned lineage could still have come back to K, so pruning biases
    visit estimates down by O(radius^{2-d}) per pruned lineage. None prunes
    nothing, except for finite snakes of a degenerate law (one child
    always), whose single lineage is pruned at the far radius.
    """

    max_tree_size: int = 10_000_000
    max_spine_steps: int = 1_000_000
    far_radius: float | None = None
    prune_radius: float | None = None

    def __post_init__(self) -> None:
        if self.max_tree_size < 1:
            raise ValueError("max_tree_size must be at least 1")
        if self.max_spine_steps < 1:
            raise ValueError("max_spine_steps must be at least 1")

    def to_json(self) -> dict[str, Any]:
        return {
            "max_tree_size": self.max_tree_size,
            "max_spine_steps": self.max_spine_steps,
            "far_radius": self.far_radius,
            "prune_radius": self.prune_radius,
        }


@dataclass(frozen=True)
class PointMeasure:
    """A finite point measure on K, stored as multiplicities in K's atom order."""

    K: SetK
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.counts) != len(self.K):
            raise LatticeError(f"point measure has {len(self.counts)} weights for |K| = {len(self.K)}")
        if any(c < 0 for c in self.counts):
            raise LatticeError("point measure multiplicities must be nonnegative")

    @classmethod
    def empty(cls, K: SetK) -> PointMeasure:
        return cls(K, (0,) * len(K))

    @classmethod
    def from_array(cls, K: SetK, counts: np.ndarray) -> PointMeasure:
        return cls(K, tuple(int(c) for c in counts))

    @classmethod
    def of_points(cls, K: SetK, points: list[Point]) -> PointMeasure:
        counts = [0] * len(K)
        for p in points:
            counts[K.index_of(p)] += 1
        return cls(K, tuple(counts))

    @property
    def mass(self) -> int:
        return sum(self.counts)

    @property
    def atoms(self) -> list[Point]:
        """Atoms with multiplicity."""
        out: list[Point] = []
        for point, c in zip(self.K.points, self.counts):
            out.extend([point] * c)
        return out

    @property
    def support(self) -> list[Point]:
        return [p for p, c in zip(self.K.points, self.counts) if c > 0]

    def __add__(self, other: PointMeasure) -> PointMeasure:
        if other.K != self.K:
            raise LatticeError("point measures live on different sets")
        return PointMeasure(self.K, tuple(a + b for a, b in zip(self.counts, other.counts)))

    def key(self) -> tuple[int, ...]:
        """Hashable identity for empirical laws over point measures."""
        return self.counts

    def to_json(self) -> list[list[int]]:
        return [[*p, c] for p, c in zip(self.K.points, self.counts) if c > 0]


@dataclass
class VisitRecord:
    visited: bool
    first_visit: Point | None
    last_visit: Point | None
    visit_count: int
    entering: PointMeasure
    censored: Censoring = Censoring.NONE
    tree_size: int = 0
    complete: bool = True
    spine_steps: int = 0
    hits: frozenset[Point] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.complete and self.censored is Censoring.NONE:
            assert self.visited == (self.visit_count >= 1) == (self.entering.mass > 0)
        assert (self.first_visit is not None) == self.visited

    @property
    def usable(self) -> bool:
        return self.censored is Censoring.NONE

    def to_json(self) -> dict[str, Any]:
        return {
            "visited": self.visited,
            "first_visit": list(self.first_visit) if self.first_visit is not None else None,
            "last_visit": list(self.last_visit) if self.last_visit is not None else None,
            "visit_count": self.visit_count,
            "entering": self.entering.to_json(),
            "censored": self.censored.value,
            "tree_size": self.tree_size,
            "complete": self.complete,
            "spine_steps": self.spine_steps,
            "hits": sorted(list(p) for p in self.hits),
        }

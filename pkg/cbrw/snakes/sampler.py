"""
Snake samplers: finite snakes (five root conventions) and spine-and-bush
snakes (infinite, reversed infinite, invariant).

A finite snake from x is the branching random walk: every vertex has an
independent number of children, every edge an independent theta step. The
samplers hand the laws to the compiled kernels as alias tables and turn
the kernel's per-sample arrays back into VisitRecords.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from cbrw.errors import LawError, SamplingError
from cbrw.lattice import SetK, as_point, rad
from cbrw.laws import AliasTable, CountLaw, JumpLaw, OffspringLaw
from cbrw.snakes import kernels
from cbrw.snakes.records import (
    Caps,
    Censoring,
    InfiniteVariant,
    PointMeasure,
    SnakeKind,
    VisitRecord,
)

logger = logging.getLogger(__name__)

FAR_FACTOR = 8.0
MIN_FAR_RADIUS = 8.0
SEED_MASK = 0xFFFFFFFF

_CENSORING = {
    kernels.DONE: Censoring.NONE,
    kernels.FIRST: Censoring.NONE,
    kernels.SIZE_CAP: Censoring.SIZE_CAP,
    kernels.SPINE_CAP: Censoring.SPINE_CAP,
}

_ONE_CHILD = AliasTable.build(np.array([0.0, 1.0]))


def default_far_radius(K: SetK, theta: JumpLaw, x: Sequence[int]) -> float:
    """FAR_FACTOR x max(Rad K, ||x||), at least MIN_FAR_RADIUS."""
    reach = max(rad(K, theta.Q), theta.norm(x))
    return max(FAR_FACTOR * reach, MIN_FAR_RADIUS)


@dataclass
class SnakeBatch:
    """Per-sample kernel output for one stream."""

    K: SetK
    status: np.ndarray
    count: np.ndarray
    first: np.ndarray
    last: np.ndarray
    size: np.ndarray
    spine: np.ndarray
    entering: np.ndarray  # (n, |K|) when recorded, else (0, |K|)
    visits: np.ndarray
    stop_at_first: bool

    def __len__(self) -> int:
        return len(self.status)

    @property
    def censored(self) -> np.ndarray:
        return (self.status == kernels.SIZE_CAP) | (self.status == kernels.SPINE_CAP)

    @property
    def visited(self) -> np.ndarray:
        return self.count >= 1

    def record(self, i: int) -> VisitRecord:
        points = self.K.points
        has_rows = len(self.entering) > 0
        if has_rows:
            entering = PointMeasure.from_array(self.K, self.entering[i])
            hits = frozenset(points[j] for j in np.flatnonzero(self.visits[i]))
        elif self.first[i] >= 0:
            entering = PointMeasure.of_points(self.K, [points[int(self.first[i])]])
            hits = frozenset({points[int(self.first[i])]})
        else:
            entering = PointMeasure.empty(self.K)
            hits = frozenset()
        status = int(self.status[i])
        return VisitRecord(
            visited=bool(self.count[i] >= 1),
            first_visit=points[int(self.first[i])] if self.first[i] >= 0 else None,
            last_visit=points[int(self.last[i])] if self.last[i] >= 0 else None,
            visit_count=int(self.count[i]),
            entering=entering,
            censored=_CENSORING[status],
            tree_size=int(self.size[i]),
            complete=status == kernels.DONE and has_rows,
            spine_steps=int(self.spine[i]),
            hits=hits,
        )

    def records(self) -> list[VisitRecord]:
        return [self.record(i) for i in range(len(self))]


class SnakeSampler:
    """Kernel arguments for one (mu, theta, K) triple."""

    def __init__(self, mu: OffspringLaw, theta: JumpLaw, K: SetK):
        if theta.dim != K.dim:
            raise LawError(f"jump law has dimension {theta.dim}, K has {K.dim}")
        self.mu = mu
        self.theta = theta
        self.K = K
        lo, shape, table = K.lookup_table()
        self.lo = lo
        self.shape = shape
        self.table = table
        self.metric = theta.norm.Q_inv / theta.dim
        self.steps = np.ascontiguousarray(theta.steps, dtype=np.int64)

    @cached_property
    def adjoint(self) -> CountLaw:
        return self.mu.adjoint()

    def _root_table(self, kind: SnakeKind) -> AliasTable:
        if kind in (SnakeKind.SNAKE, SnakeKind.STRICT):
            return self.mu.alias
        if kind in (SnakeKind.ADJOINT, SnakeKind.ADJOINT_STRICT):
            return self.adjoint.alias
        return _ONE_CHILD

    def _prune2(self, caps: Caps, x: Sequence[int]) -> float:
        radius = caps.prune_radius
        if radius is None and self.mu.degenerate:
            radius = caps.far_radius or default_far_radius(self.K, self.theta, x)
        return float(radius) ** 2 if radius else 0.0

    def finite(
        self,
        x: Sequence[int],
        kind: SnakeKind,
        n: int,
        seed: int,
        caps: Caps,
        stop_at_first: bool = False,
        record: bool = True,
    ) -> SnakeBatch:
        start = np.asarray(as_point(x), dtype=np.int64)
        root = self._root_table(SnakeKind(kind))
        child = self.mu.alias
        steps_table = self.theta.alias
        out = kernels.finite_batch(
            int(seed) & SEED_MASK, int(n), start,
            root.prob, root.alias, child.prob, child.alias,
            self.steps, steps_table.prob, steps_table.alias,
            self.lo, self.shape, self.table, len(self.K), self.metric, self._prune2(caps, x),
            SnakeKind(kind).skips_root, stop_at_first, caps.max_tree_size, record,
        )
        status, count, first, last, size, entering, visits = out
        return SnakeBatch(
            self.K, status, count, first, last, size, np.zeros(n, dtype=np.int64),
            entering, visits, stop_at_first,
        )

    def infinite(
        self,
        x: Sequence[int],
        variant: InfiniteVariant,
        n: int,
        seed: int,
        caps: Caps,
        ignore_root_bush: bool = False,
        ignore_spine: bool = False,
        stop_at_first: bool = False,
        record: bool = True,
    ) -> SnakeBatch:
        variant = InfiniteVariant(variant)
        far = caps.far_radius or default_far_radius(self.K, self.theta, x)
        if far <= rad(self.K, self.theta.Q):
            raise SamplingError(f"far radius {far:g} does not exceed Rad(K) = {rad(self.K, self.theta.Q):g}")
        if self.theta.norm(x) >= far:
            raise SamplingError(f"start {tuple(x)} lies outside the far radius {far:g}")
        prune = caps.prune_radius or 0.0
        start = np.asarray(as_point(x), dtype=np.int64)
        bush = self.adjoint.alias
        root = self.mu.alias if variant is InfiniteVariant.INVARIANT else bush
        child = self.mu.alias
        steps_table = self.theta.alias
        out = kernels.infinite_batch(
            int(seed) & SEED_MASK, int(n), start, variant.spine_sign,
            root.prob, root.alias, bush.prob, bush.alias, child.prob, child.alias,
            self.steps, steps_table.prob, steps_table.alias,
            self.lo, self.shape, self.table, len(self.K), self.metric, far * far, prune * prune,
            ignore_root_bush, ignore_spine, stop_at_first, caps.max_tree_size, caps.max_spine_steps, record,
        )
        status, count, first, last, size, spine, entering, visits = out
        return SnakeBatch(self.K, status, count, first, last, size, spine, entering, visits, stop_at_first)


def _seed_from(rng: np.random.Generator) -> int:
    return int(rng.integers(0, SEED_MASK + 1))


def sample_snake(
    x: Sequence[int],
    mu: OffspringLaw,
    theta: JumpLaw,
    K: SetK,
    caps: Caps | None = None,
    rng: np.random.Generator | None = None,
    kind: SnakeKind | str = SnakeKind.SNAKE,
    stop_at_first: bool = False,
) -> VisitRecord:
    """One finite snake from x, traversed depth-first."""
    rng = rng if rng is not None else np.random.default_rng()
    batch = SnakeSampler(mu, theta, K).finite(
        x, SnakeKind(kind), 1, _seed_from(rng), caps or Caps(), stop_at_first=stop_at_first
    )
    return batch.record(0)


def sample_infinite_snake(
    x: Sequence[int],
    variant: InfiniteVariant | str,
    mu: OffspringLaw,
    theta: JumpLaw,
    K: SetK,
    caps: Caps | None = None,
    rng: np.random.Generator | None = None,
    ignore_root_bush: bool = False,
    ignore_spine: bool = False,
    stop_at_first: bool = False,
) -> VisitRecord:
    """One spine-and-bush snake from x, cut off when the spine leaves the far radius."""
    rng = rng if rng is not None else np.random.default_rng()
    batch = SnakeSampler(mu, theta, K).infinite(
        x,
        InfiniteVariant(variant),
        1,
        _seed_from(rng),
        caps or Caps(),
        ignore_root_bush=ignore_root_bush,
        ignore_spine=ignore_spine,
        stop_at_first=stop_at_first,
    )
    return batch.record(0)

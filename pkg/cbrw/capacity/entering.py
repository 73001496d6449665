"""
Entering measures: the limit law hm_K and its comparison with snakes from
far away conditioned on visiting K.

A sample of hm_K starts at a in K with probability Es(a)/BCap(K) and walks the
chain

    P(x, y) = theta(x - y)(1 - r(y)) Es(y) / Es(x)

until it leaves the far radius. Each site z it passes contributes the
entering points of N ~ mu_z independent one-child snakes started at z; the
start contributes delta_a. Sites outside the escape box use the exterior
values of the fields, and the part of the path beyond half the far radius is
reported as a tail bound a_d BCap sum ||z||^{2-d}.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Hashable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from cbrw.capacity.bcap import CapacityResult
from cbrw.errors import SamplingError
from cbrw.lattice import Point, SetK, as_point
from cbrw.laws import CountLaw, JumpLaw, constant_a_d, position_offspring
from cbrw.snakes import (
    Caps,
    SnakeKind,
    SnakeSampler,
    collect_records,
    default_far_radius,
)
from cbrw.snakes.sampler import SEED_MASK

logger = logging.getLogger(__name__)

MIN_ACCEPTED = 1000
MERGE_BELOW = 5
OTHER = "other"


def tv_distance(p: Counter, q: Counter, merge_below: int = MERGE_BELOW) -> float:
    """Total variation between two empirical laws given as counts.

    Outcomes whose combined count is below `merge_below` are pooled into
    a single bucket before comparing.
    """
    n_p, n_q = sum(p.values()), sum(q.values())
    if n_p == 0 or n_q == 0:
        raise SamplingError("total variation of an empty sample")
    pooled_p: Counter = Counter()
    pooled_q: Counter = Counter()
    for key in set(p) | set(q):
        bucket = key if p[key] + q[key] >= merge_below else OTHER
        pooled_p[bucket] += p[key]
        pooled_q[bucket] += q[key]
    return 0.5 * sum(abs(pooled_p[k] / n_p - pooled_q[k] / n_q) for k in set(pooled_p) | set(pooled_q))


def histogram_z(counts: np.ndarray, expected: np.ndarray) -> np.ndarray:
    """|frequency - expected| in binomial standard errors, per atom."""
    n = counts.sum()
    freq = counts / n
    se = np.sqrt(expected * (1.0 - expected) / n)
    gap = np.abs(freq - expected)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, gap / se, np.where(gap > 0, np.inf, 0.0))
    return z


@dataclass
class HmSample:
    counts: np.ndarray  # entering multiplicities in K's order
    start: int
    path_length: int
    tail_bound: float
    censored_snakes: int = 0

    def key(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.counts)


class HmSampler:
    """Draws from hm_K for a solved capacity (fields of the central pass)."""

    def __init__(self, capacity: CapacityResult, theta: JumpLaw, caps: Caps | None = None):
        if capacity.escape is None or capacity.visit_fields is None:
            raise SamplingError("capacity result carries no fields to sample hm_K from")
        self.K: SetK = capacity.K
        self.theta = theta
        self.escape = capacity.escape
        self.visit_fields = capacity.visit_fields
        self.mu = self.visit_fields.mu
        self.caps = caps or Caps()
        self.far = self.caps.far_radius or default_far_radius(self.K, theta, as_point([0] * theta.dim))
        self.bcap = capacity.bcap_first
        self.start_law = capacity.harmonic_first
        self.snakes = SnakeSampler(self.mu, theta, self.K)
        self._a_d = constant_a_d(theta.dim, theta.Q)
        self._r_tilde = self.visit_fields.r_tilde
        self._rows: dict[Point, tuple[np.ndarray, np.ndarray]] = {}
        self._laws: dict[Point, CountLaw] = {}

    def _row(self, z: Point) -> tuple[np.ndarray, np.ndarray]:
        row = self._rows.get(z)
        if row is not None:
            return row
        point = np.asarray(z, dtype=np.int64)
        targets = point[None, :] - self.theta.steps
        if self.escape.box.contains(z):
            es_z = self.escape.Es.value_at(z)
            if es_z <= 0:
                raise SamplingError(f"hm_K chain stuck: Es vanishes at {z}")
            inside = self.escape.box.contains_array(targets)
            weight = np.empty(len(targets))
            weight[inside] = (1.0 - self.visit_fields.r.values_at(targets[inside])) * self.escape.Es.values_at(
                targets[inside]
            )
            weight[~inside] = self.escape.exterior.evaluate(targets[~inside])
            probs = self.theta.probs * weight / es_z
            total = float(probs.sum())
            if abs(total - 1.0) > 1e-6:
                logger.debug(f"P row at {z} sums to {total:.8f}; renormalising")
            if total <= 0:
                raise SamplingError(f"hm_K chain stuck at {z}")
            probs = probs / total
        else:
            probs = self.theta.probs
        row = (targets, np.cumsum(probs))
        self._rows[z] = row
        return row

    def _law(self, z: Point) -> CountLaw:
        law = self._laws.get(z)
        if law is None:
            law = position_offspring(self.mu, self._r_tilde, self.visit_fields.r, z)
            self._laws[z] = law
        return law

    def sample(self, rng: np.random.Generator) -> HmSample:
        n_atoms = len(self.K)
        counts = np.zeros(n_atoms, dtype=np.int64)
        start = int(rng.choice(n_atoms, p=self.start_law))
        counts[start] += 1
        z = self.K.points[start]
        norm = self.theta.norm
        tail = 0.0
        censored = 0
        steps = 0
        while steps < self.caps.max_spine_steps:
            targets, cumulative = self._row(z)
            pick = min(int(np.searchsorted(cumulative, rng.random(), side="right")), len(cumulative) - 1)
            z = tuple(int(c) for c in targets[pick])
            steps += 1
            dist = norm(z)
            if dist > self.far:
                break
            if dist > self.far / 2:
                tail += dist ** (2 - self.theta.dim)
            if z in self.K:
                counts[self.K.index_of(z)] += 1
                continue
            n_children = int(self._law(z).sample(rng))
            if n_children == 0:
                continue
            batch = self.snakes.finite(
                z, SnakeKind.ONE_CHILD, n_children, int(rng.integers(0, SEED_MASK + 1)), self.caps, record=True
            )
            usable = ~batch.censored
            censored += int(np.count_nonzero(~usable))
            counts += batch.entering[usable].sum(axis=0)
        return HmSample(counts, start, steps, self._a_d * self.bcap * tail, censored)

    def sample_many(self, n: int, rng: np.random.Generator) -> list[HmSample]:
        return [self.sample(rng) for _ in range(n)]


def sample_hm_K(
    capacity: CapacityResult,
    theta: JumpLaw,
    caps: Caps | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[int, ...]:
    """One draw of hm_K as multiplicities in K's atom order."""
    rng = rng if rng is not None else np.random.default_rng()
    return HmSampler(capacity, theta, caps).sample(rng).key()


@dataclass
class EnteringRow:
    x: Point
    norm: float
    accepted: int
    tv: float
    first_counts: np.ndarray
    last_counts: np.ndarray
    first_z: float  # worst per-atom z-score against harmonic_first
    last_z: float
    range_tv: float | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "x": list(self.x),
            "norm": self.norm,
            "accepted": self.accepted,
            "tv": self.tv,
            "first_counts": self.first_counts.tolist(),
            "last_counts": self.last_counts.tolist(),
            "first_z": self.first_z,
            "last_z": self.last_z,
            "range_tv": self.range_tv,
        }


@dataclass
class EnteringComparison:
    rows: list[EnteringRow]
    hm_samples: int
    hm_tail_max: float
    hm_law: Counter = field(repr=False, default_factory=Counter)

    @property
    def tv(self) -> list[float]:
        return [row.tv for row in self.rows]

    def tv_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.tv, self.tv[1:]))


def hm_law(samples: Sequence[HmSample]) -> Counter:
    return Counter(s.key() for s in samples)


def sample_range_limit(
    capacity: CapacityResult,
    theta: JumpLaw,
    samples: Sequence[HmSample],
    rng: np.random.Generator,
    caps: Caps | None = None,
) -> Counter:
    """Limit law of K intersected with the range, for snakes conditioned on visiting.

    Every entering atom of an hm_K sample is continued by an independent
    snake started there; the outcome is the union of the atoms they visit.
    """
    if capacity.visit_fields is None:
        raise SamplingError("capacity result carries no visit fields")
    caps = caps or Caps()
    sampler = SnakeSampler(capacity.visit_fields.mu, theta, capacity.K)
    points = capacity.K.points
    law: Counter = Counter()
    for sample in samples:
        hits: set[Point] = set()
        for j in np.flatnonzero(sample.counts):
            batch = sampler.finite(
                points[j], SnakeKind.SNAKE, int(sample.counts[j]), int(rng.integers(0, SEED_MASK + 1)), caps
            )
            for i in np.flatnonzero(~batch.censored):
                hits.update(points[k] for k in np.flatnonzero(batch.visits[i]))
        law[tuple(sorted(hits))] += 1
    return law


def conditional_entering_comparison(
    capacity: CapacityResult,
    theta: JumpLaw,
    x_list: Sequence[Sequence[int]],
    n_samples: int,
    rng_seed: int,
    *,
    n_hm: int | None = None,
    caps: Caps | None = None,
    threads: int | None = None,
    min_accepted: int = MIN_ACCEPTED,
    with_range: bool = False,
) -> EnteringComparison:
    """TV distance between the entering measure from each x (given a visit) and hm_K."""
    if capacity.visit_fields is None:
        raise SamplingError("capacity result carries no visit fields")
    mu = capacity.visit_fields.mu
    K = capacity.K
    caps = caps or Caps()
    rng = np.random.default_rng(rng_seed)
    n_hm = n_hm or n_samples

    hm_sampler = HmSampler(capacity, theta, caps)
    samples = hm_sampler.sample_many(n_hm, rng)
    law = hm_law(samples)
    tail_max = max(s.tail_bound for s in samples)
    logger.info(f"hm_K: {n_hm} samples, {len(law)} distinct entering measures, tail bound <= {tail_max:.2e}")
    range_law = sample_range_limit(capacity, theta, samples, rng, caps) if with_range else None

    rows: list[EnteringRow] = []
    n_atoms = len(K)
    for i, x in enumerate(x_list):
        point = as_point(x)
        records = collect_records(
            "snake", point, K, n_samples, (int(rng_seed) + 7919 * (i + 1)) & SEED_MASK,
            mu=mu, theta=theta, caps=caps, threads=threads, visited_only=True,
        )
        if len(records) < min_accepted:
            raise SamplingError(
                f"only {len(records)} of {n_samples} snakes from {point} visited K "
                f"(need {min_accepted}); increase n_samples"
            )
        conditioned: Counter[Hashable] = Counter(r.entering.key() for r in records)
        first = np.bincount([K.index_of(r.first_visit) for r in records], minlength=n_atoms)
        last = np.bincount([K.index_of(r.last_visit) for r in records], minlength=n_atoms)
        row = EnteringRow(
            x=point,
            norm=theta.norm(point),
            accepted=len(records),
            tv=tv_distance(conditioned, law),
            first_counts=first,
            last_counts=last,
            first_z=float(np.max(histogram_z(first, capacity.harmonic_first))),
            last_z=float(np.max(histogram_z(last, capacity.harmonic_last))),
        )
        if range_law is not None:
            row.range_tv = tv_distance(Counter(tuple(sorted(r.hits)) for r in records), range_law)
        logger.info(f"entering from {point}: {row.accepted} accepted, TV {row.tv:.4f}")
        rows.append(row)
    return EnteringComparison(rows=rows, hm_samples=n_hm, hm_tail_max=tail_max, hm_law=law)

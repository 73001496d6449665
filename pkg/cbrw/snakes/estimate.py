"""
Monte Carlo estimation of visiting probabilities.

Samples are split into fixed-size streams; stream i is seeded with
(base XOR i) mod 2**32 and streams run on a thread pool (the kernels release
the GIL). Counts are merged in stream order, so an estimate depends on the
base seed and never on the thread count.
"""

from __future__ import annotations

import logging
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.stats import binomtest

from cbrw.errors import SamplingError
from cbrw.lattice import Point, SetK, as_point
from cbrw.laws import JumpLaw, OffspringLaw
from cbrw.snakes.records import Caps, InfiniteVariant, SnakeKind, VisitRecord
from cbrw.snakes.sampler import SEED_MASK, SnakeBatch, SnakeSampler

logger = logging.getLogger(__name__)

THREADS_ENV = "CBRW_THREADS"
STREAM_SAMPLES = 4096
CENSOR_WARN_RATE = 1e-4


@dataclass(frozen=True)
class EstimateKind:
    """What one sample is: a finite snake or a spine-and-bush snake with exclusions."""

    name: str
    snake: SnakeKind | None = None
    variant: InfiniteVariant | None = None
    ignore_root_bush: bool = False
    ignore_spine: bool = False
    description: str = ""


ESTIMATE_KINDS: dict[str, EstimateKind] = {
    k.name: k
    for k in (
        EstimateKind("snake", snake=SnakeKind.SNAKE, description="p: snake visits K"),
        EstimateKind("adjoint", snake=SnakeKind.ADJOINT, description="r: adjoint snake visits K"),
        EstimateKind("one-child", snake=SnakeKind.ONE_CHILD, description="s~: one-child root visits K"),
        EstimateKind("strict", snake=SnakeKind.STRICT, description="P-bar: snake visits K after time zero"),
        EstimateKind(
            "adjoint-strict", snake=SnakeKind.ADJOINT_STRICT, description="R: adjoint snake visits K after time zero"
        ),
        EstimateKind("infinite", variant=InfiniteVariant.INFINITE, description="q: infinite snake visits K"),
        EstimateKind("reversed", variant=InfiniteVariant.REVERSED, description="q-: reversed infinite snake"),
        EstimateKind("invariant", variant=InfiniteVariant.INVARIANT, description="invariant snake visits K"),
        EstimateKind(
            "escape",
            variant=InfiniteVariant.REVERSED,
            ignore_root_bush=True,
            description="1 - Es: reversed snake visits K outside the root bush",
        ),
        EstimateKind(
            "escape-plus",
            variant=InfiniteVariant.INFINITE,
            ignore_root_bush=True,
            description="1 - Es+: infinite snake visits K outside the root bush",
        ),
        EstimateKind(
            "escape-last",
            variant=InfiniteVariant.INVARIANT,
            ignore_spine=True,
            description="1 - es: invariant snake visits K off the spine",
        ),
    )
}


def get_estimate_kind(kind: str | EstimateKind) -> EstimateKind:
    if isinstance(kind, EstimateKind):
        return kind
    try:
        return ESTIMATE_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown kind '{kind}'; expected one of {sorted(ESTIMATE_KINDS)}") from None


def resolve_threads(threads: int | None = None) -> int:
    """Explicit value, else CBRW_THREADS, else 1."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning(f"ignoring non-integer {THREADS_ENV}={env!r}")
    return 1


def stream_seed(base: int, stream: int) -> int:
    return (int(base) ^ int(stream)) & SEED_MASK


def stream_sizes(n_samples: int, stream_samples: int = STREAM_SAMPLES) -> list[int]:
    full, rest = divmod(int(n_samples), stream_samples)
    return [stream_samples] * full + ([rest] if rest else [])


def run_streams(
    draw: Callable[[int, int], SnakeBatch],
    n_samples: int,
    base_seed: int,
    threads: int | None = None,
) -> list[SnakeBatch]:
    """draw(n, seed) for every stream, returned in stream order."""
    sizes = stream_sizes(n_samples)
    seeds = [stream_seed(base_seed, i) for i in range(len(sizes))]
    workers = min(resolve_threads(threads), max(len(sizes), 1))
    if workers == 1:
        return [draw(n, s) for n, s in zip(sizes, seeds)]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(draw, sizes, seeds))


def _make_draw(
    sampler: SnakeSampler,
    kind: EstimateKind,
    x: Sequence[int],
    caps: Caps,
    stop_at_first: bool,
    record: bool,
) -> Callable[[int, int], SnakeBatch]:
    if kind.snake is not None:
        snake = kind.snake

        def draw(n: int, seed: int) -> SnakeBatch:
            return sampler.finite(x, snake, n, seed, caps, stop_at_first=stop_at_first, record=record)

        return draw

    assert kind.variant is not None
    variant = kind.variant

    def draw_infinite(n: int, seed: int) -> SnakeBatch:
        return sampler.infinite(
            x, variant, n, seed, caps,
            ignore_root_bush=kind.ignore_root_bush,
            ignore_spine=kind.ignore_spine,
            stop_at_first=stop_at_first,
            record=record,
        )

    return draw_infinite


@dataclass
class VisitEstimate:
    kind: str
    x: Point
    n_samples: int
    n_used: int
    n_visited: int
    n_censored: int
    p_hat: float
    stderr: float
    ci_low: float
    ci_high: float
    mean_visits: float | None
    visits_second_moment: float | None
    first_counts: np.ndarray
    last_counts: np.ndarray | None

    @property
    def escape(self) -> float:
        """Non-visit frequency, the estimate for the escape kinds."""
        return 1.0 - self.p_hat

    @property
    def censor_rate(self) -> float:
        return self.n_censored / self.n_samples

    def first_frequencies(self) -> np.ndarray:
        """Per-atom frequency of "first visit at a" among usable samples."""
        return self.first_counts / self.n_used

    def within(self, value: float, sigmas: float = 3.0, slack: float = 0.0) -> bool:
        return abs(self.p_hat - value) <= sigmas * self.stderr + slack

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "x": list(self.x),
            "n_samples": self.n_samples,
            "n_used": self.n_used,
            "n_visited": self.n_visited,
            "n_censored": self.n_censored,
            "p_hat": self.p_hat,
            "stderr": self.stderr,
            "ci": [self.ci_low, self.ci_high],
            "mean_visits": self.mean_visits,
            "visits_second_moment": self.visits_second_moment,
        }


def estimate_visit_prob(
    kind: str | EstimateKind,
    x: Sequence[int],
    K: SetK,
    n_samples: int,
    rng_seed: int,
    *,
    mu: OffspringLaw,
    theta: JumpLaw,
    caps: Caps | None = None,
    threads: int | None = None,
    full: bool = False,
) -> VisitEstimate:
    """Binomial estimate of the visit probability of `kind` from x.

    With full=False each sample stops at its first visit; visit counts and
    last visits are only reported for full traversals.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    spec = get_estimate_kind(kind)
    caps = caps or Caps()
    point = as_point(x)
    sampler = SnakeSampler(mu, theta, K)
    draw = _make_draw(sampler, spec, point, caps, stop_at_first=not full, record=False)
    batches = run_streams(draw, n_samples, rng_seed, threads)

    n_atoms = len(K)
    n_censored = n_visited = 0
    first_counts = np.zeros(n_atoms, dtype=np.int64)
    last_counts = np.zeros(n_atoms, dtype=np.int64)
    visit_sum = 0.0
    visit_sq = 0.0
    for batch in batches:
        usable = ~batch.censored
        n_censored += int(np.count_nonzero(~usable))
        hit = usable & batch.visited
        n_visited += int(np.count_nonzero(hit))
        first_counts += np.bincount(batch.first[hit], minlength=n_atoms)
        if full:
            last_counts += np.bincount(batch.last[hit], minlength=n_atoms)
            counts = batch.count[usable].astype(float)
            visit_sum += float(counts.sum())
            visit_sq += float((counts**2).sum())

    n_used = n_samples - n_censored
    if n_used == 0:
        raise SamplingError(f"all {n_samples} samples of '{spec.name}' from {point} were censored")
    rate = n_censored / n_samples
    if rate > CENSOR_WARN_RATE:
        logger.warning(f"{spec.name} from {point}: censor rate {rate:.2e} ({n_censored}/{n_samples})")

    p_hat = n_visited / n_used
    stderr = float(np.sqrt(p_hat * (1.0 - p_hat) / n_used))
    ci = binomtest(n_visited, n_used).proportion_ci(confidence_level=0.95, method="exact")
    estimate = VisitEstimate(
        kind=spec.name,
        x=point,
        n_samples=n_samples,
        n_used=n_used,
        n_visited=n_visited,
        n_censored=n_censored,
        p_hat=p_hat,
        stderr=stderr,
        ci_low=float(ci.low),
        ci_high=float(ci.high),
        mean_visits=visit_sum / n_used if full else None,
        visits_second_moment=visit_sq / n_used if full else None,
        first_counts=first_counts,
        last_counts=last_counts if full else None,
    )
    logger.debug(f"{spec.name} from {point}: p_hat={p_hat:.5g} +- {stderr:.2g} ({n_used} samples)")
    return estimate


def collect_records(
    kind: str | EstimateKind,
    x: Sequence[int],
    K: SetK,
    n_samples: int,
    rng_seed: int,
    *,
    mu: OffspringLaw,
    theta: JumpLaw,
    caps: Caps | None = None,
    threads: int | None = None,
    visited_only: bool = False,
) -> list[VisitRecord]:
    """Full-traversal records (with entering measures), in stream order."""
    spec = get_estimate_kind(kind)
    sampler = SnakeSampler(mu, theta, K)
    draw = _make_draw(sampler, spec, as_point(x), caps or Caps(), stop_at_first=False, record=True)
    records: list[VisitRecord] = []
    for batch in run_streams(draw, n_samples, rng_seed, threads):
        keep = ~batch.censored
        if visited_only:
            keep &= batch.visited
        records.extend(batch.record(int(i)) for i in np.flatnonzero(keep))
    return records

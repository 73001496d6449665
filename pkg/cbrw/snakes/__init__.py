"""Snakes: tree-indexed random walks sampled depth-first without storing the tree."""

from cbrw.snakes.estimate import (
    ESTIMATE_KINDS,
    STREAM_SAMPLES,
    THREADS_ENV,
    EstimateKind,
    VisitEstimate,
    collect_records,
    estimate_visit_prob,
    get_estimate_kind,
    resolve_threads,
    run_streams,
    stream_seed,
    stream_sizes,
)
from cbrw.snakes.records import (
    Caps,
    Censoring,
    InfiniteVariant,
    PointMeasure,
    SnakeKind,
    VisitRecord,
)
from cbrw.snakes.sampler import (
    SnakeBatch,
    SnakeSampler,
    default_far_radius,
    sample_infinite_snake,
    sample_snake,
)

__all__ = [
    "ESTIMATE_KINDS",
    "STREAM_SAMPLES",
    "THREADS_ENV",
    "Caps",
    "Censoring",
    "EstimateKind",
    "InfiniteVariant",
    "PointMeasure",
    "SnakeBatch",
    "SnakeKind",
    "SnakeSampler",
    "VisitEstimate",
    "VisitRecord",
    "collect_records",
    "default_far_radius",
    "estimate_visit_prob",
    "get_estimate_kind",
    "resolve_threads",
    "run_streams",
    "sample_infinite_snake",
    "sample_snake",
    "stream_seed",
    "stream_sizes",
]

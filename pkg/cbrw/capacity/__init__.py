"""Escape fields, branching and classical capacity, entering measures."""

from cbrw.capacity.bcap import CapacityResult, branching_capacity, far_field_visit
from cbrw.capacity.classical import (
    ClassicalCapacity,
    classical_capacity,
    first_moment_bound,
    hitting_probability,
)
from cbrw.capacity.entering import (
    EnteringComparison,
    EnteringRow,
    HmSample,
    HmSampler,
    conditional_entering_comparison,
    histogram_z,
    hm_law,
    sample_hm_K,
    sample_range_limit,
    tv_distance,
)
from cbrw.capacity.escape import (
    ESCAPE_NAMES,
    EscapeFields,
    TransitionRow,
    escape_fields,
    transition_row,
)

__all__ = [
    "ESCAPE_NAMES",
    "CapacityResult",
    "ClassicalCapacity",
    "EnteringComparison",
    "EnteringRow",
    "EscapeFields",
    "HmSample",
    "HmSampler",
    "TransitionRow",
    "branching_capacity",
    "classical_capacity",
    "conditional_entering_comparison",
    "escape_fields",
    "far_field_visit",
    "first_moment_bound",
    "hitting_probability",
    "histogram_z",
    "hm_law",
    "sample_hm_K",
    "sample_range_limit",
    "transition_row",
    "tv_distance",
]

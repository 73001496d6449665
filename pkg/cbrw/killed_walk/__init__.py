"""Random walk with killing: path weights, Green functions, harmonic measures."""

from cbrw.killed_walk.green import (
    PlainGreen,
    far_field,
    green_to_set,
    plain_green,
    plain_green_field,
    weighted_green,
)
from cbrw.killed_walk.identities import (
    IdentityResiduals,
    chain_occupation_check,
    first_visit_identity_check,
    transition_matrix,
)
from cbrw.killed_walk.walk import (
    KilledWalk,
    SiteSet,
    green_killed,
    harmonic_measure,
    path_weight,
    site_mask,
)

__all__ = [
    "IdentityResiduals",
    "KilledWalk",
    "PlainGreen",
    "SiteSet",
    "chain_occupation_check",
    "far_field",
    "first_visit_identity_check",
    "green_killed",
    "green_to_set",
    "harmonic_measure",
    "path_weight",
    "plain_green",
    "plain_green_field",
    "site_mask",
    "transition_matrix",
    "weighted_green",
]

"""Integer-lattice geometry: points, norms, balls, boxes and target sets."""

from cbrw.lattice.box import (
    MAX_SITES,
    Box,
    Point,
    SetK,
    as_point,
    origin,
    random_subset,
    unit,
)
from cbrw.lattice.geometry import (
    ZERO_NORM,
    BallKind,
    ThetaNorm,
    ball,
    cube_points,
    diam,
    dist,
    dist_diam_rad,
    euclidean_norm,
    norm_theta,
    rad,
)

__all__ = [
    "MAX_SITES",
    "ZERO_NORM",
    "BallKind",
    "Box",
    "Point",
    "SetK",
    "ThetaNorm",
    "as_point",
    "ball",
    "cube_points",
    "diam",
    "dist",
    "dist_diam_rad",
    "euclidean_norm",
    "norm_theta",
    "origin",
    "rad",
    "random_subset",
    "unit",
]

"""
Norms, balls and distances on Z^d.

The jump-adapted norm is ||x|| = sqrt(x . Q^{-1} x) / sqrt(d). Following the
usual convention of the model, ||0|| = |0| = 0.5 everywhere, so the distance
from a point of A to A is 0.5 and a singleton has diameter 0.5.
"""

from __future__ import annotations

from collections.abc import Sequence
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

from cbrw.errors import DegenerateCovarianceError, EmptySetError, LatticeError
from cbrw.lattice.box import Point, SetK, as_point


ZERO_NORM = 0.5


class BallKind(Enum):
    THETA_NORM = "theta_norm"
    EUCLIDEAN = "euclidean"
    SLAB = "slab"


class ThetaNorm:
    """The norm ||x|| attached to a covariance matrix Q."""

    def __init__(self, Q: np.ndarray | Sequence[Sequence[float]]):
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        if Q.shape[0] != Q.shape[1]:
            raise DegenerateCovarianceError(f"degenerate covariance: shape {Q.shape}")
        if not np.allclose(Q, Q.T, atol=1e-12):
            raise DegenerateCovarianceError("degenerate covariance: Q is not symmetric")
        eigenvalues = np.linalg.eigvalsh(Q)
        if eigenvalues.min() <= 1e-14 * max(1.0, eigenvalues.max()):
            raise DegenerateCovarianceError("degenerate covariance")
        self.Q = Q
        self.Q_inv = np.linalg.inv(Q)
        self.dim = Q.shape[0]
        self._lambda_min = float(eigenvalues.min())
        self._lambda_max = float(eigenvalues.max())

    def __call__(self, x: Sequence[int] | np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        if not np.any(x):
            return ZERO_NORM
        return float(np.sqrt(x @ self.Q_inv @ x / self.dim))

    def many(self, points: np.ndarray) -> np.ndarray:
        """Row-wise norm of an (n, d) array, zero rows mapped to 0.5."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        squared = np.einsum("ij,jk,ik->i", points, self.Q_inv, points) / self.dim
        out = np.sqrt(np.maximum(squared, 0.0))
        out[~np.any(points != 0, axis=1)] = ZERO_NORM
        return out

    def euclidean_bounds(self) -> tuple[float, float]:
        """(c1, c2) with c1 |x| <= ||x|| <= c2 |x| for x != 0."""
        return (
            1.0 / np.sqrt(self.dim * self._lambda_max),
            1.0 / np.sqrt(self.dim * self._lambda_min),
        )

    def pairwise(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Matrix of ||a_i - b_j|| with the zero convention."""
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.atleast_2d(np.asarray(b, dtype=float))
        out = cdist(a, b, metric="mahalanobis", VI=self.Q_inv) / np.sqrt(self.dim)
        same = cdist(a, b, metric="cityblock") == 0
        out[same] = ZERO_NORM
        return out


def norm_theta(Q: np.ndarray | Sequence[Sequence[float]], x: Sequence[int]) -> float:
    """||x|| = sqrt(x . Q^{-1} x)/sqrt(d), with ||0|| = 0.5."""
    return ThetaNorm(Q)(x)


def euclidean_norm(x: Sequence[int]) -> float:
    """|x| with |0| = 0.5."""
    value = float(np.linalg.norm(np.asarray(x, dtype=float)))
    return value if value > 0 else ZERO_NORM


# ---------------------------------------------------------------------------
# Balls
# ---------------------------------------------------------------------------


def _euclidean_points(r: float, m: int) -> np.ndarray:
    """Integer points z in Z^m with |z| <= r (|0| = 0.5), built axis by axis."""
    reach = int(np.floor(r))
    values = np.arange(-reach, reach + 1, dtype=np.int64)
    partial = np.zeros((1, 0), dtype=np.int64)
    squares = np.zeros(1, dtype=np.int64)
    r_squared = r * r
    for _ in range(m):
        grown = np.repeat(partial, len(values), axis=0)
        column = np.tile(values, len(partial))
        new_squares = np.repeat(squares, len(values)) + column * column
        keep = new_squares <= r_squared + 1e-9
        partial = np.column_stack([grown[keep], column[keep]])
        squares = new_squares[keep]
    if r < ZERO_NORM:
        partial = partial[squares > 0]
    return partial


def ball(
    kind: BallKind | str,
    r: float,
    m: int | None = None,
    d: int | None = None,
    Q: np.ndarray | None = None,
) -> SetK:
    """Enumerate a ball as a SetK, points in lexicographic order.

    kind=theta_norm: {z : ||z|| <= r} (needs Q).
    kind=euclidean:  {z : |z| <= r} in Z^d.
    kind=slab:       B^m(r) = {(z1, 0) : z1 in Z^m, |z1| <= r}.
    """
    kind = BallKind(kind)
    if r < 0:
        raise LatticeError(f"ball radius must be nonnegative, got {r}")
    if d is None:
        if Q is None:
            raise LatticeError("ball needs the dimension d or a covariance Q")
        d = int(np.asarray(Q).shape[0])

    if kind is BallKind.EUCLIDEAN:
        pts = _euclidean_points(r, d)
    elif kind is BallKind.SLAB:
        if m is None or not 1 <= m <= d:
            raise LatticeError(f"slab dimension m must be in [1, {d}], got {m}")
        low = _euclidean_points(r, m)
        pts = np.zeros((len(low), d), dtype=np.int64)
        pts[:, :m] = low
    else:
        if Q is None:
            raise LatticeError("theta_norm ball needs the covariance Q")
        norm = ThetaNorm(Q)
        c1, _ = norm.euclidean_bounds()
        reach = int(np.floor(r / c1 + 1e-9))
        cube = cube_points(reach, d)
        pts = cube[norm.many(cube) <= r + 1e-12]

    if len(pts) == 0:
        raise EmptySetError(f"empty set: {kind.value} ball of radius {r} has no lattice points")
    order = np.lexsort(pts.T[::-1])
    return SetK(tuple(as_point(p) for p in pts[order]))


def cube_points(reach: int, d: int) -> np.ndarray:
    """All points of the cube [-reach, reach]^d as an array."""
    side = np.arange(-reach, reach + 1, dtype=np.int64)
    mesh = np.meshgrid(*([side] * d), indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------


def _as_array(A: SetK | Sequence[int] | Point) -> np.ndarray:
    if isinstance(A, SetK):
        return A.array
    return np.atleast_2d(np.asarray(A, dtype=np.int64))


def dist(A: SetK | Point, B: SetK | Point, Q: np.ndarray) -> float:
    """min ||x - y|| over x in A, y in B."""
    return float(ThetaNorm(Q).pairwise(_as_array(A), _as_array(B)).min())


def diam(A: SetK, Q: np.ndarray) -> float:
    """max ||a - b|| over pairs of A (0.5 for a singleton)."""
    return float(ThetaNorm(Q).pairwise(A.array, A.array).max())


def rad(A: SetK, Q: np.ndarray) -> float:
    """Rad(A) = max ||a||."""
    return float(ThetaNorm(Q).many(A.array).max())


def dist_diam_rad(A: SetK, B: SetK | Point, Q: np.ndarray) -> tuple[float, float, float]:
    return dist(A, B, Q), diam(A, Q), rad(A, Q)

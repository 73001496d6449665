"""
Finite lattice containers: truncation boxes and target sets.

Box is the domain of every field: a sup-norm cube around a center, with a
dense row-major index map. SetK is the finite, nonempty target set K.

Both are immutable and safe to share across worker threads.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from cbrw.errors import BoxError, DuplicatePointError, EmptySetError, LatticeError

Point = tuple[int, ...]

# Fields index boxes with 32-bit signed offsets.
MAX_SITES = 2**31


def as_point(coords: Iterable[Any]) -> Point:
    """Coerce a coordinate iterable (list, tuple, ndarray row) to a Point."""
    return tuple(int(c) for c in coords)


def origin(dim: int) -> Point:
    return (0,) * dim


def unit(dim: int, axis: int = 0, length: int = 1) -> Point:
    """length * e_axis."""
    return tuple(length if i == axis else 0 for i in range(dim))


@dataclass(frozen=True)
class Box:
    """Axis-aligned cube {x : |x - center|_inf <= radius}."""

    center: Point
    radius: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "radius", int(self.radius))
        if not self.center:
            raise BoxError("box center must have at least one coordinate")
        if self.radius < 0:
            raise BoxError(f"box radius must be nonnegative, got {self.radius}")
        if self.size > MAX_SITES:
            raise BoxError(f"box with {self.size} sites exceeds the {MAX_SITES} site limit")

    # -- shape --------------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def side(self) -> int:
        return 2 * self.radius + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.side,) * self.dim

    @property
    def size(self) -> int:
        return self.side**self.dim

    @property
    def lower(self) -> np.ndarray:
        return np.asarray(self.center, dtype=np.int64) - self.radius

    @property
    def upper(self) -> np.ndarray:
        return np.asarray(self.center, dtype=np.int64) + self.radius

    # -- membership and index map ------------------------------------------

    def contains(self, point: Sequence[int]) -> bool:
        if len(point) != self.dim:
            return False
        return all(abs(int(p) - c) <= self.radius for p, c in zip(point, self.center))

    def contains_array(self, points: np.ndarray) -> np.ndarray:
        """Row-wise containment for an (n, d) integer array."""
        points = np.atleast_2d(np.asarray(points, dtype=np.int64))
        offset = np.abs(points - np.asarray(self.center, dtype=np.int64))
        return np.all(offset <= self.radius, axis=1)

    def local(self, point: Sequence[int]) -> tuple[int, ...]:
        """Array index of a point inside a field of shape `self.shape`."""
        if not self.contains(point):
            raise BoxError(f"point {tuple(point)} outside box {self}")
        return tuple(int(p) - c + self.radius for p, c in zip(point, self.center))

    def index(self, point: Sequence[int]) -> int:
        return int(np.ravel_multi_index(self.local(point), self.shape))

    def indices(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=np.int64))
        if not np.all(self.contains_array(points)):
            raise BoxError("some points lie outside the box")
        offsets = points - self.lower
        return np.ravel_multi_index(tuple(offsets.T), self.shape)

    def point(self, index: int) -> Point:
        if not 0 <= index < self.size:
            raise BoxError(f"index {index} outside [0, {self.size})")
        offsets = np.unravel_index(int(index), self.shape)
        return tuple(int(o) + c - self.radius for o, c in zip(offsets, self.center))

    def coords(self) -> np.ndarray:
        """All sites as an (N, d) array, in index-map order."""
        grids = self.grid()
        return np.stack([g.ravel() for g in grids], axis=1)

    def grid(self) -> list[np.ndarray]:
        """Coordinate arrays, one per axis, each of shape `self.shape`."""
        lower = self.lower
        offsets = np.indices(self.shape, dtype=np.int64)
        return [offsets[i] + lower[i] for i in range(self.dim)]

    # -- derived boxes ------------------------------------------------------

    def enlarge(self, margin: int) -> Box:
        return Box(self.center, self.radius + margin)

    def is_inside(self, other: Box) -> bool:
        """True when every site of self is a site of other."""
        if other.dim != self.dim:
            return False
        gap = np.abs(np.asarray(self.center) - np.asarray(other.center))
        return bool(np.all(gap + self.radius <= other.radius))

    def slices_in(self, other: Box) -> tuple[slice, ...]:
        """Slices selecting self inside an array shaped like other."""
        if not self.is_inside(other):
            raise BoxError(f"{self} is not inside {other}")
        start = self.lower - other.lower
        return tuple(slice(int(s), int(s) + self.side) for s in start)

    @classmethod
    def around(cls, points: SetK, margin: int) -> Box:
        """Smallest origin-centred box holding K with `margin` spare sites."""
        reach = int(np.max(np.abs(points.array))) if len(points) else 0
        return cls(origin(points.dim), reach + margin)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        return {"center": list(self.center), "radius": self.radius}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> Box:
        return cls(as_point(data["center"]), int(data["radius"]))


@dataclass(frozen=True)
class SetK:
    """Finite nonempty set of lattice points, in a fixed atom order."""

    points: tuple[Point, ...]
    _members: dict[Point, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        pts = tuple(as_point(p) for p in self.points)
        if not pts:
            raise EmptySetError("empty set")
        dims = {len(p) for p in pts}
        if len(dims) != 1 or 0 in dims:
            raise LatticeError(f"points of mixed or zero dimension: {sorted(dims)}")
        members: dict[Point, int] = {}
        for i, p in enumerate(pts):
            if p in members:
                raise DuplicatePointError(f"duplicate point {p}")
            members[p] = i
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_members", members)

    @classmethod
    def of(cls, points: Iterable[Iterable[Any]]) -> SetK:
        return cls(tuple(as_point(p) for p in points))

    @classmethod
    def single(cls, point: Iterable[Any]) -> SetK:
        return cls((as_point(point),))

    @property
    def dim(self) -> int:
        return len(self.points[0])

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=np.int64).reshape(len(self.points), self.dim)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[Point]:
        return iter(self.points)

    def __contains__(self, point: object) -> bool:
        if isinstance(point, tuple):
            return point in self._members
        if isinstance(point, (list, np.ndarray)):
            return as_point(point) in self._members
        return False

    def index_of(self, point: Sequence[int]) -> int:
        try:
            return self._members[as_point(point)]
        except KeyError:
            raise LatticeError(f"{tuple(point)} is not in K") from None

    def is_subset(self, other: SetK) -> bool:
        return all(p in other for p in self.points)

    # -- set algebra --------------------------------------------------------

    def union(self, other: SetK) -> SetK:
        extra = [p for p in other.points if p not in self._members]
        return SetK(self.points + tuple(extra))

    def intersection(self, other: SetK) -> SetK | None:
        """Common points, or None when the sets are disjoint."""
        common = tuple(p for p in self.points if p in other)
        return SetK(common) if common else None

    def translate(self, shift: Sequence[int]) -> SetK:
        return SetK(tuple(tuple(c + int(s) for c, s in zip(p, shift)) for p in self.points))

    # -- lookup for compiled kernels ----------------------------------------

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        arr = self.array
        return arr.min(axis=0), arr.max(axis=0)

    def lookup_table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Dense membership table over the bounding box of K.

        Returns (lower corner, shape, flat int64 table) where the table holds
        1 + atom index for members of K and 0 elsewhere, row-major.
        """
        lo, hi = self.bbox()
        shape = (hi - lo + 1).astype(np.int64)
        table = np.zeros(int(np.prod(shape)), dtype=np.int64)
        flat = np.ravel_multi_index(tuple((self.array - lo).T), tuple(shape))
        table[flat] = np.arange(1, len(self) + 1)
        return lo.astype(np.int64), shape, table

    # -- serialization ------------------------------------------------------

    def to_json(self) -> list[list[int]]:
        return [list(p) for p in self.points]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[int]]) -> SetK:
        return cls.of(data)


def random_subset(points: SetK, size: int, rng: np.random.Generator) -> SetK:
    """Uniform random subset of `size` atoms, in the parent's atom order."""
    if not 1 <= size <= len(points):
        raise LatticeError(f"subset size {size} outside [1, {len(points)}]")
    chosen = np.sort(rng.choice(len(points), size=size, replace=False))
    return SetK(tuple(points.points[i] for i in chosen))

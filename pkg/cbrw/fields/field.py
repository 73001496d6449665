"""
Scalar fields on a Box with an explicit exterior policy.

Every field the solvers produce (p, r, P-bar, R, s~, Es, Es+, es, Green
columns and rows) is a ScalarField. Values inside the box live in a dense
array shaped like the box; values outside come from the Exterior policy.

Fields export to a flat binary format

    b"CBRWFLD1" | d (<i8) | center (d x <i8) | radius (<i8) | values (<f8, index order)

and to CSV with columns index, x0 .. x{d-1}, value.
"""

from __future__ import annotations

import csv
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cbrw.errors import BoxError, LatticeError
from cbrw.lattice import Box

MAGIC = b"CBRWFLD1"


@dataclass(frozen=True)
class Exterior:
    """Value policy for sites outside the box."""

    kind: str = "zero"  # zero | constant | function
    value: float = 0.0
    func: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)
    label: str = ""

    @classmethod
    def zero(cls) -> Exterior:
        return cls("zero")

    @classmethod
    def constant(cls, value: float) -> Exterior:
        return cls("constant", float(value)) if value != 0 else cls("zero")

    @classmethod
    def function(cls, func: Callable[[np.ndarray], np.ndarray], label: str = "function") -> Exterior:
        return cls("function", func=func, label=label)

    def evaluate(self, coords: np.ndarray) -> np.ndarray:
        """Exterior values at an (n, d) array of coordinates."""
        coords = np.atleast_2d(coords)
        if self.kind == "zero":
            return np.zeros(len(coords))
        if self.kind == "constant":
            return np.full(len(coords), self.value)
        if self.func is None:
            raise LatticeError("function exterior without a function")
        return np.asarray(self.func(coords), dtype=float)

    def describe(self) -> str:
        if self.kind == "constant":
            return f"constant {self.value:g}"
        return self.label or self.kind


@dataclass
class ScalarField:
    box: Box
    values: np.ndarray
    exterior: Exterior = field(default_factory=Exterior.zero)
    name: str = ""

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.box.shape:
            values = values.reshape(self.box.shape)
        if not np.all(np.isfinite(values)):
            raise LatticeError(f"field {self.name!r} has non-finite values")
        values = values.copy() if values.flags.writeable else values
        values.flags.writeable = False
        self.values = values

    @classmethod
    def zeros(cls, box: Box, name: str = "", exterior: Exterior | None = None) -> ScalarField:
        return cls(box, np.zeros(box.shape), exterior or Exterior.zero(), name)

    @classmethod
    def constant(cls, box: Box, value: float, name: str = "") -> ScalarField:
        return cls(box, np.full(box.shape, float(value)), Exterior.constant(value), name)

    # -- evaluation ---------------------------------------------------------

    def value_at(self, point: Sequence[int]) -> float:
        if self.box.contains(point):
            return float(self.values[self.box.local(point)])
        return float(self.exterior.evaluate(np.asarray([point], dtype=np.int64))[0])

    def values_at(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=np.int64))
        inside = self.box.contains_array(points)
        out = np.empty(len(points))
        if np.any(inside):
            local = points[inside] - self.box.lower
            out[inside] = self.values[tuple(local.T)]
        if np.any(~inside):
            out[~inside] = self.exterior.evaluate(points[~inside])
        return out

    def ravel(self) -> np.ndarray:
        """Values in index-map order."""
        return self.values.ravel()

    def restrict(self, box: Box) -> ScalarField:
        return ScalarField(box, self.values[box.slices_in(self.box)], self.exterior, self.name)

    def with_values(self, values: np.ndarray, name: str | None = None) -> ScalarField:
        return ScalarField(self.box, values, self.exterior, self.name if name is None else name)

    def max_abs_diff(self, other: ScalarField) -> float:
        if other.box != self.box:
            raise BoxError("fields live on different boxes")
        return float(np.max(np.abs(self.values - other.values)))

    # -- export -------------------------------------------------------------

    def to_binary(self, path: str | Path) -> None:
        header = np.asarray([self.box.dim, *self.box.center, self.box.radius], dtype="<i8")
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(header.tobytes())
            f.write(np.ascontiguousarray(self.ravel(), dtype="<f8").tobytes())

    @classmethod
    def from_binary(cls, path: str | Path, name: str = "") -> ScalarField:
        raw = Path(path).read_bytes()
        if raw[: len(MAGIC)] != MAGIC:
            raise LatticeError(f"{path} is not a cbrw field file")
        offset = len(MAGIC)
        d = int(np.frombuffer(raw, dtype="<i8", count=1, offset=offset)[0])
        header = np.frombuffer(raw, dtype="<i8", count=d + 1, offset=offset + 8)
        box = Box(tuple(int(c) for c in header[:d]), int(header[d]))
        values = np.frombuffer(raw, dtype="<f8", offset=offset + 8 * (d + 2))
        if values.size != box.size:
            raise LatticeError(f"{path}: expected {box.size} values, found {values.size}")
        return cls(box, values.reshape(box.shape).copy(), name=name)

    def to_csv(self, path: str | Path) -> None:
        coords = self.box.coords()
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["index", *[f"x{i}" for i in range(self.box.dim)], "value"])
            for i, (point, value) in enumerate(zip(coords.tolist(), self.ravel().tolist())):
                writer.writerow([i, *point, f"{value:.17g}"])


class KillingField(ScalarField):
    """Per-site death probabilities k(x) in [0, 1]."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if np.any(self.values < -1e-15) or np.any(self.values > 1 + 1e-15):
            raise LatticeError("killing values must lie in [0, 1]")
        if self.exterior.kind == "constant" and not 0.0 <= self.exterior.value <= 1.0:
            raise LatticeError("exterior killing must lie in [0, 1]")

    @classmethod
    def uniform(cls, box: Box, k: float) -> KillingField:
        return cls(box, np.full(box.shape, float(k)), Exterior.constant(k), name=f"k={k:g}")

    @classmethod
    def from_field(cls, f: ScalarField, name: str | None = None) -> KillingField:
        values = np.clip(f.values, 0.0, 1.0)
        return cls(f.box, values, f.exterior, name or f.name)


def write_convergence_log(path: str | Path, history: Sequence[float]) -> None:
    """CSV of (iteration, residual) pairs."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["iteration", "residual"])
        for i, residual in enumerate(history, start=1):
            writer.writerow([i, f"{residual:.17g}"])

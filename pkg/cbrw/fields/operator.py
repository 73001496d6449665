"""
The Markov operator (A v)(x) = sum_e theta(e) v(x + e) on a truncation box.

Interior contributions are accumulated from shifted overlapping slices of
the value array; contributions of sites outside the box are collected once
per exterior policy into a `boundary` array. The same stencil also builds
the equivalent scipy.sparse matrix for direct and Krylov solves.
"""

from __future__ import annotations

import logging
from functools import cached_property

import numpy as np
from scipy import sparse

from cbrw.fields.field import Exterior
from cbrw.lattice import Box
from cbrw.laws import JumpLaw

logger = logging.getLogger(__name__)


def _overlap(e: int, side: int) -> tuple[slice, slice] | None:
    """(dst, src) slices along one axis for the shift x -> x + e."""
    if abs(e) >= side:
        return None
    if e >= 0:
        return slice(0, side - e), slice(e, side)
    return slice(-e, side), slice(0, side + e)


class MarkovOperator:
    def __init__(self, theta: JumpLaw, box: Box):
        if theta.dim != box.dim:
            raise ValueError(f"jump law dimension {theta.dim} != box dimension {box.dim}")
        self.theta = theta
        self.box = box
        self._stencil: list[tuple[float, tuple[slice, ...], tuple[slice, ...]]] = []
        self._outside: list[tuple[float, np.ndarray, tuple[slice, ...] | None]] = []
        for step, prob in zip(theta.steps, theta.probs):
            pairs = [_overlap(int(e), box.side) for e in step]
            if any(p is None for p in pairs):
                self._outside.append((float(prob), step, None))
                continue
            dst = tuple(p[0] for p in pairs)  # type: ignore[index]
            src = tuple(p[1] for p in pairs)  # type: ignore[index]
            self._stencil.append((float(prob), dst, src))
            if np.any(step != 0):
                self._outside.append((float(prob), step, dst))

    def reversed(self) -> MarkovOperator:
        """Operator of theta~(x) = theta(-x)."""
        return MarkovOperator(self.theta.reversed(), self.box)

    def apply(self, values: np.ndarray, boundary: np.ndarray | None = None) -> np.ndarray:
        out = np.zeros(self.box.shape)
        for prob, dst, src in self._stencil:
            out[dst] += prob * values[src]
        if boundary is not None:
            out += boundary
        return out

    @cached_property
    def inside_mass(self) -> np.ndarray:
        """theta-probability that one step from x stays in the box."""
        return self.apply(np.ones(self.box.shape))

    def boundary(self, exterior: Exterior) -> np.ndarray | None:
        """sum_e theta(e) ext(x + e) over steps leaving the box; None for zero."""
        if exterior.kind == "zero":
            return None
        if exterior.kind == "constant":
            return exterior.value * (1.0 - self.inside_mass)
        term = np.zeros(self.box.shape)
        lower = self.box.lower
        for prob, step, dst in self._outside:
            mask = np.ones(self.box.shape, dtype=bool)
            if dst is not None:
                mask[dst] = False
            local = np.nonzero(mask)
            if len(local[0]) == 0:
                continue
            coords = np.stack(local, axis=1) + lower + step
            term[local] += prob * exterior.evaluate(coords)
        return term

    def matrix(self) -> sparse.csr_matrix:
        """Sparse N x N matrix with A[i(x), i(x+e)] = theta(e) inside the box."""
        n = self.box.size
        flat = np.arange(n, dtype=np.int64).reshape(self.box.shape)
        rows, cols, data = [], [], []
        for prob, dst, src in self._stencil:
            r = flat[dst].ravel()
            rows.append(r)
            cols.append(flat[src].ravel())
            data.append(np.full(len(r), prob))
        return sparse.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        )

"""
Walker alias tables for O(1) sampling from finite pmfs.

Tables are plain arrays (`prob`, `alias`) so the compiled snake kernels can
draw from them with a single uniform: i = floor(u * n), keep i when the
fractional part is below prob[i], otherwise take alias[i].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cbrw.errors import LawError


@dataclass(frozen=True)
class AliasTable:
    prob: np.ndarray  # float64, acceptance threshold per column
    alias: np.ndarray  # int64, fallback outcome per column

    @classmethod
    def build(cls, weights: np.ndarray) -> AliasTable:
        """Vose's construction; weights need not be normalised."""
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 1 or len(weights) == 0:
            raise LawError("alias table needs a nonempty 1-D weight vector")
        if np.any(weights < 0) or weights.sum() <= 0:
            raise LawError("alias weights must be nonnegative with positive total")

        n = len(weights)
        scaled = weights * n / weights.sum()
        prob = np.ones(n, dtype=np.float64)
        alias = np.arange(n, dtype=np.int64)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] = scaled[g] + scaled[s] - 1.0
            if scaled[g] < 1.0:
                small.append(g)
            else:
                large.append(g)
        # Leftovers are 1 up to rounding.
        for i in small + large:
            prob[i] = 1.0
        return cls(prob=prob, alias=alias)

    @property
    def size(self) -> int:
        return len(self.prob)

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray | int:
        u = rng.random(size) * self.size
        column = np.floor(u).astype(np.int64)
        column = np.minimum(column, self.size - 1)
        keep = (u - column) < self.prob[column]
        out = np.where(keep, column, self.alias[column])
        return int(out) if size is None else out

    def probabilities(self) -> np.ndarray:
        """Recover the normalised pmf encoded by the table."""
        n = self.size
        out = self.prob / n
        np.add.at(out, self.alias, (1.0 - self.prob) / n)
        return out

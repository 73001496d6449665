"""
The plain (unkilled) Green function g(x, y) = sum_n P(S_n = y - x) and the
weighted sum W(x) = sum_n (n + 1) P(S_n = x).

Two engines:

axis
    For laws supported on the coordinate axes the rate-one continuous-time
    walk has independent coordinates, so

        g(x) = int_0^inf prod_i p_i(t, x_i) dt,   W(x) = int_0^inf t prod_i p_i(t, x_i) dt,

    with p_i the one-dimensional compound Poisson kernel (a scaled Bessel
    function for nearest-neighbour axes). The integral runs to the horizon
    T; beyond it the Gaussian approximation N(0, tQ) is integrated in closed
    form, and the reported bound is that tail times the relative LCLT error
    observed at T.

evolve
    Any finite-support law: push the step distribution through a box
    centred at the start for at most `horizon` steps. Mass leaving the box
    is killed; its possible return is bounded with the far-field estimate
    at the box distance, and unfinished mass with a Gaussian LCLT tail.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gamma, gammainc, ive

from cbrw.errors import LawError, TailBoundError
from cbrw.fields import MarkovOperator, ScalarField
from cbrw.lattice import Box, SetK, as_point
from cbrw.laws import JumpLaw, constant_a_d, constant_t_d

logger = logging.getLogger(__name__)

DEFAULT_REL_TOL = 1e-3
EVOLVE_RADIUS = 6
EVOLVE_MASS_FLOOR = 1e-14
FIELD_QUADRATURE_ORDER = 48


@dataclass
class PlainGreen:
    value: float
    tail_bound: float
    horizon: float
    engine: str

    def __float__(self) -> float:
        return self.value


def far_field(theta: JumpLaw, x: Sequence[int]) -> float:
    """a_d ||x||^{2-d}."""
    d = theta.dim
    return constant_a_d(d, theta.Q) * theta.norm(x) ** (2 - d)


# ---------------------------------------------------------------------------
# axis engine
# ---------------------------------------------------------------------------


class _AxisKernel:
    """p(t, m) for the continuous-time walk along one axis."""

    def __init__(self, lengths: np.ndarray, weights: np.ndarray):
        self.lengths = lengths.astype(float)
        self.weights = weights
        self.rate = float(weights.sum())
        self.variance = float(weights @ self.lengths**2)
        self.nearest = (
            set(lengths.tolist()) == {-1, 1}
            and abs(weights[lengths == 1].sum() - weights[lengths == -1].sum()) < 1e-15
        )

    def __call__(self, t: float, m: int) -> float:
        if t == 0.0:
            return 1.0 if m == 0 else 0.0
        if self.nearest:
            return float(ive(abs(m), t * self.rate))
        lengths, weights = self.lengths, self.weights

        def integrand(k: float) -> float:
            cos_part = weights @ np.cos(lengths * k)
            sin_part = weights @ np.sin(lengths * k)
            return float(np.exp(-t * (self.rate - cos_part)) * np.cos(t * sin_part - m * k))

        width = min(np.pi / 2, 4.0 / np.sqrt(t * self.variance + 1.0))
        value, _ = integrate.quad(integrand, 0.0, np.pi, points=[width], limit=200, epsabs=1e-15)
        return max(value / np.pi, 0.0)

    def table(self, t: float, offsets: np.ndarray) -> np.ndarray:
        """p(t, m) for every m in offsets (t > 0)."""
        if self.nearest:
            return ive(np.abs(offsets), t * self.rate)
        cache: dict[int, float] = {}
        out = np.empty(len(offsets))
        for i, m in enumerate(offsets.tolist()):
            if m not in cache:
                cache[m] = self(t, m)
            out[i] = cache[m]
        return out


def _axis_kernels(theta: JumpLaw) -> list[_AxisKernel] | None:
    steps = theta.steps
    if np.any(np.count_nonzero(steps, axis=1) > 1):
        return None
    kernels = []
    for axis in range(theta.dim):
        on_axis = steps[:, axis] != 0
        kernels.append(_AxisKernel(steps[on_axis, axis], theta.probs[on_axis]))
    return kernels


def _gaussian_tail(theta: JumpLaw, x: np.ndarray, horizon: float, power: int) -> float:
    """int_T^inf t^power (2 pi t)^{-d/2} det(Q)^{-1/2} exp(-x.Q^{-1}x / 2t) dt."""
    d = theta.dim
    s = d / 2 - power - 1
    prefactor = (2 * np.pi) ** (-d / 2) / np.sqrt(np.linalg.det(theta.Q))
    a = 0.5 * float(x @ theta.norm.Q_inv @ x)
    if a / horizon < 1e-12:
        return prefactor * horizon ** (-s) / s
    return prefactor * a ** (-s) * gamma(s) * gammainc(s, a / horizon)


def _axis_integral(
    theta: JumpLaw, kernels: list[_AxisKernel], x: np.ndarray, horizon: float, power: int
) -> tuple[float, float]:
    def density(t: float) -> float:
        out = 1.0
        for kernel, m in zip(kernels, x):
            out *= kernel(t, int(m))
            if out == 0.0:
                break
        return out

    def integrand(t: float) -> float:
        return t**power * density(t)

    edges = [0.0, 1.0]
    while edges[-1] * 10 < horizon:
        edges.append(edges[-1] * 10)
    edges.append(horizon)
    head, err = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, e = integrate.quad(integrand, lo, hi, limit=200, epsabs=1e-16, epsrel=1e-10)
        head += value
        err += e

    d = theta.dim
    tail = _gaussian_tail(theta, x, horizon, power)
    a = 0.5 * float(x @ theta.norm.Q_inv @ x)
    gauss_at_t = (2 * np.pi * horizon) ** (-d / 2) / np.sqrt(np.linalg.det(theta.Q)) * np.exp(-a / horizon)
    ratio = density(horizon) / gauss_at_t if gauss_at_t > 0 else 0.0
    bound = tail * abs(ratio - 1.0) + err
    return head + tail, bound


# ---------------------------------------------------------------------------
# evolve engine
# ---------------------------------------------------------------------------


def _evolve(
    theta: JumpLaw, x: np.ndarray, horizon: int, radius: int, power: int
) -> tuple[float, float]:
    d = theta.dim
    start = (0,) * d
    target = tuple(int(c) for c in x)
    box = Box(start, radius)
    if not box.contains(target):
        raise LawError(f"evolve engine needs |x|_inf <= {radius}, got {target}")
    push = MarkovOperator(theta.reversed(), box)
    u = np.zeros(box.shape)
    u[box.local(start)] = 1.0
    at = box.local(target)

    total = 0.0
    exited = 0.0
    weighted_exit = 0.0
    mass = 1.0
    n = 0
    while n < horizon and mass > EVOLVE_MASS_FLOOR:
        total += (n + 1) ** power * u[at]
        u = push.apply(u)
        new_mass = float(u.sum())
        exited += mass - new_mass
        weighted_exit += (n + 2) ** power * (mass - new_mass)
        mass = new_mass
        n += 1

    gap = radius + 1 - int(np.max(np.abs(x)))
    c1, _ = theta.norm.euclidean_bounds()
    reach = max(gap * c1, 1.0)
    a_d = constant_a_d(d, theta.Q)
    g_far = 1.5 * a_d * reach ** (2 - d)
    bound = weighted_exit * g_far
    if power:
        bound += exited * 1.5 * constant_t_d(d, theta.Q) * a_d**2 * reach ** (4 - d)
    if mass > EVOLVE_MASS_FLOOR:
        lclt = 2.0 * (2 * np.pi) ** (-d / 2) / np.sqrt(np.linalg.det(theta.Q))
        s = d / 2 - power - 1
        bound += lclt * 2**power * n ** (-s) / s
    return total, bound


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------


def _green(
    theta: JumpLaw,
    diff: np.ndarray,
    power: int,
    horizon: float | None,
    tol: float,
    engine: str,
    radius: int,
) -> PlainGreen:
    d = theta.dim
    if d < 5 and power:
        raise LawError(f"the weighted Green sum diverges for d={d} < 5")
    if d < 3:
        raise LawError(f"the walk is recurrent for d={d}")
    kernels = _axis_kernels(theta) if engine in ("auto", "axis") else None
    if engine == "axis" and kernels is None:
        raise LawError(f"{theta.name} is not supported on the coordinate axes")

    if kernels is not None:
        spread = float(diff @ theta.norm.Q_inv @ diff)
        T = float(horizon) if horizon else max(1e5, 1e3 * (spread + 1.0))
        value, bound = _axis_integral(theta, kernels, diff, T, power)
        result = PlainGreen(value, bound, T, "axis")
    else:
        steps = int(horizon) if horizon else 20_000
        value, bound = _evolve(theta, diff, steps, radius, power)
        result = PlainGreen(value, bound, steps, "evolve")

    if result.tail_bound > tol * max(result.value, 1e-300):
        raise TailBoundError(
            f"Green sum at {tuple(diff.tolist())} ({result.engine} engine, horizon {result.horizon:g})",
            result.tail_bound,
        )
    return result


def plain_green(
    theta: JumpLaw,
    x: Sequence[int],
    y: Sequence[int] | None = None,
    horizon: float | None = None,
    tol: float = DEFAULT_REL_TOL,
    engine: str = "auto",
    radius: int = EVOLVE_RADIUS,
) -> PlainGreen:
    """g(x, y) (g(0, x) when y is None), with relative tail tolerance tol."""
    diff = np.asarray(as_point(x), dtype=np.int64)
    if y is not None:
        diff = np.asarray(as_point(y), dtype=np.int64) - diff
    return _green(theta, diff, 0, horizon, tol, engine, radius)


def weighted_green(
    theta: JumpLaw,
    x: Sequence[int],
    horizon: float | None = None,
    tol: float = 1e-2,
    engine: str = "auto",
    radius: int = EVOLVE_RADIUS,
) -> PlainGreen:
    """W(x) = sum_n (n + 1) P(S_n = x), of order ||x||^{4-d}."""
    diff = np.asarray(as_point(x), dtype=np.int64)
    return _green(theta, diff, 1, horizon, tol, engine, radius)


def green_to_set(theta: JumpLaw, x: Sequence[int], K: SetK, tol: float = DEFAULT_REL_TOL) -> float:
    """sum_{a in K} g(x, a), the expected number of visits to K."""
    return float(sum(plain_green(theta, x, a, tol=tol).value for a in K))


def _quadrature_nodes(horizon: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on [0, 1], then on decades of t in log scale up to the horizon."""
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [0.5 * (x + 1.0)], [0.5 * w]
    edges = [1.0]
    while edges[-1] * 10 < horizon:
        edges.append(edges[-1] * 10)
    edges.append(horizon)
    for lo, hi in zip(edges[:-1], edges[1:]):
        a, b = np.log(lo), np.log(hi)
        t = np.exp(0.5 * (b - a) * (x + 1.0) + a)
        nodes.append(t)
        weights.append(0.5 * (b - a) * w * t)
    return np.concatenate(nodes), np.concatenate(weights)


def plain_green_field(
    theta: JumpLaw,
    y: Sequence[int],
    box: Box,
    tol: float = DEFAULT_REL_TOL,
    order: int = FIELD_QUADRATURE_ORDER,
) -> ScalarField:
    """
    Column g(., y) over a box.

    The axis engine as one tensor-product quadrature: at every node t the
    density prod_i p_i(t, y_i - x_i) over the box is the outer product of
    one table per axis. The Gaussian tail past the horizon is added per site.
    """
    d = theta.dim
    if d < 3:
        raise LawError(f"the walk is recurrent for d={d}")
    kernels = _axis_kernels(theta)
    if kernels is None:
        raise LawError(f"{theta.name} is not supported on the coordinate axes")
    target = np.asarray(as_point(y), dtype=np.int64)
    offsets = [target[i] - np.arange(box.lower[i], box.upper[i] + 1) for i in range(d)]

    def density(t: float) -> np.ndarray:
        out = kernels[0].table(t, offsets[0])
        for kernel, m in zip(kernels[1:], offsets[1:]):
            out = np.multiply.outer(out, kernel.table(t, m))
        return out

    # axis-supported steps have diagonal Q, so x.Q^{-1}x / 2 is a sum over axes
    q_inv = np.diag(theta.norm.Q_inv)
    a = 0.5 * q_inv[0] * offsets[0].astype(float) ** 2
    for qi, m in zip(q_inv[1:], offsets[1:]):
        a = np.add.outer(a, 0.5 * qi * m.astype(float) ** 2)
    horizon = max(1e5, 1e3 * (2.0 * float(a.max()) + 1.0))

    values = np.zeros(box.shape)
    nodes, weights = _quadrature_nodes(horizon, order)
    for t, w in zip(nodes, weights):
        values += w * density(float(t))

    s = d / 2 - 1
    prefactor = (2 * np.pi) ** (-d / 2) / np.sqrt(np.linalg.det(theta.Q))
    near = a / horizon < 1e-12
    a_safe = np.where(near, 1.0, a)
    tail = np.where(
        near,
        prefactor * horizon ** (-s) / s,
        prefactor * a_safe ** (-s) * gamma(s) * gammainc(s, a_safe / horizon),
    )
    gauss = prefactor * horizon ** (-d / 2) * np.exp(-a / horizon)
    bound = tail * np.abs(density(horizon) / gauss - 1.0)
    values += tail

    worst = float(np.max(bound / values))
    if worst > tol:
        raise TailBoundError(f"Green column at {tuple(target.tolist())} (horizon {horizon:g})", worst)
    logger.debug(f"plain_green_field: {len(nodes)} nodes, horizon {horizon:g}, relative tail bound {worst:.1e}")
    return ScalarField(box, values, name=f"g(., {tuple(target.tolist())})")

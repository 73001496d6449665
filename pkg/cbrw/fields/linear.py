"""
Linear fixed-point problems on a box.

Two shapes cover every linear equation in the package:

    column form:  v = rhs + c * (A v + b)       (Green columns, q, hitting)
    row form:     v = rhs + A(c * v) + b        (Green rows, Es, Es+, EsR)

where A is a MarkovOperator, c a per-site coefficient (1 - killing, or an
indicator), and b the exterior contribution. Methods:

    sweep   synchronous Jacobi sweeps, stopped when the sup-norm update < tol
    direct  scipy.sparse.linalg.spsolve on the assembled matrix
    krylov  bicgstab on a matrix-free LinearOperator
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, bicgstab, spsolve

from cbrw.errors import ConvergenceError
from cbrw.fields.operator import MarkovOperator

logger = logging.getLogger(__name__)

METHODS = ("sweep", "direct", "krylov")
DEFAULT_TOL = 1e-12


def default_max_iters(op: MarkovOperator) -> int:
    """10 x (Euclidean box diameter)^2, inflated for lazy laws."""
    diameter_sq = (2 * op.box.radius + 1) ** 2 * op.box.dim
    laziness = float(op.theta.prob_of((0,) * op.box.dim))
    return int(np.ceil(10 * diameter_sq / max(1.0 - laziness, 1e-3)))


@dataclass
class LinearSolution:
    values: np.ndarray
    iterations: int
    residual: float
    method: str
    history: list[float] = field(default_factory=list)


def _step(
    op: MarkovOperator,
    v: np.ndarray,
    rhs: np.ndarray,
    coef: np.ndarray,
    form: str,
    boundary: np.ndarray | None,
) -> np.ndarray:
    if form == "column":
        return rhs + coef * op.apply(v, boundary)
    return rhs + op.apply(coef * v, boundary)


def fixed_point_residual(
    op: MarkovOperator,
    v: np.ndarray,
    rhs: np.ndarray,
    coef: np.ndarray,
    form: str = "column",
    boundary: np.ndarray | None = None,
) -> float:
    return float(np.max(np.abs(_step(op, v, rhs, coef, form, boundary) - v)))


def solve_linear_field(
    op: MarkovOperator,
    rhs: np.ndarray,
    coef: np.ndarray | float,
    form: str = "column",
    boundary: np.ndarray | None = None,
    method: str = "sweep",
    tol: float = DEFAULT_TOL,
    max_iters: int | None = None,
    initial: np.ndarray | None = None,
    label: str = "field",
) -> LinearSolution:
    if method not in METHODS:
        raise ValueError(f"unknown method '{method}'; expected one of {METHODS}")
    if form not in ("column", "row"):
        raise ValueError(f"unknown form '{form}'")
    rhs = np.asarray(rhs, dtype=float).reshape(op.box.shape)
    coef = np.broadcast_to(np.asarray(coef, dtype=float), op.box.shape)
    max_iters = max_iters or default_max_iters(op)

    if method == "sweep":
        v = rhs.copy() if initial is None else np.array(initial, dtype=float)
        history: list[float] = []
        for it in range(1, max_iters + 1):
            new = _step(op, v, rhs, coef, form, boundary)
            update = float(np.max(np.abs(new - v)))
            history.append(update)
            v = new
            if it % 500 == 0:
                logger.debug(f"{label}: sweep {it}, update {update:.3e}")
            if update < tol:
                return LinearSolution(v, it, update, method, history)
        raise ConvergenceError(f"{label}: sweeps did not converge", history[-1], max_iters)

    # Assembled or matrix-free: (I - T) v = rhs + extra
    extra = np.zeros(op.box.shape)
    if boundary is not None:
        extra = coef * boundary if form == "column" else boundary
    b = (rhs + extra).ravel()
    n = op.box.size

    if method == "direct":
        A = op.matrix()
        c = sparse.diags(coef.ravel())
        T = c @ A if form == "column" else A @ c
        system = (sparse.identity(n, format="csc") - T.tocsc()).tocsc()
        v = np.asarray(spsolve(system, b)).reshape(op.box.shape)
        iterations = 1
    else:
        def matvec(x: np.ndarray) -> np.ndarray:
            x = x.reshape(op.box.shape)
            if form == "column":
                return (x - coef * op.apply(x)).ravel()
            return (x - op.apply(coef * x)).ravel()

        system_op = LinearOperator((n, n), matvec=matvec, dtype=float)
        x0 = None if initial is None else np.asarray(initial, dtype=float).ravel()
        counter = {"n": 0}

        def count(_: np.ndarray) -> None:
            counter["n"] += 1

        solution, info = bicgstab(
            system_op, b, x0=x0, rtol=tol, atol=tol * 1e-2, maxiter=max_iters, callback=count
        )
        if info != 0:
            residual = fixed_point_residual(op, solution.reshape(op.box.shape), rhs, coef, form, boundary)
            reason = "did not converge" if info > 0 else f"broke down (info {info})"
            raise ConvergenceError(f"{label}: bicgstab {reason}", residual, counter["n"])
        v = solution.reshape(op.box.shape)
        iterations = counter["n"]

    residual = fixed_point_residual(op, v, rhs, coef, form, boundary)
    logger.debug(f"{label}: {method} solve, fixed-point residual {residual:.3e}")
    return LinearSolution(v, iterations, residual, method, [residual])

"""
Visiting probabilities of K by the nonlinear fixed-point recursion.

    p(x) = 1 on K,   p(x) = f(A p(x)) off K,   f(t) = 1 - sum_k mu(k)(1 - t)^k

Starting from p_0 = 1_K the Picard iterates increase to the fixed point.
Sites outside the box carry an exterior policy: p = 0 gives a certified
lower bracket, the first-moment bound min(1, sum_a a_d ||x - a||^{2-d})
an upper one. From p the remaining fields follow pointwise:

    s~ = A p (one-child visit probability; 1 on K)
    r  = 1 - phi~(1 - s~) off K, 1 on K      (adjoint snake)
    P̄  = f(A p)                              (snake, strictly after time zero)
    R  = 1 - phi~(1 - A p)                   (adjoint snake, strictly after time zero)

with phi~ the generating function of the adjoint measure.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import NoConvergence, newton_krylov

from cbrw.errors import BoxError, ConvergenceError
from cbrw.fields import (
    DEFAULT_TOL,
    Exterior,
    KillingField,
    MarkovOperator,
    ScalarField,
    default_max_iters,
    write_convergence_log,
)
from cbrw.killed_walk import site_mask
from cbrw.lattice import Box, SetK
from cbrw.laws import CountLaw, JumpLaw, OffspringLaw, constant_a_d

logger = logging.getLogger(__name__)

SOLVER_METHODS = ("picard", "newton-krylov")
BRACKETS = ("lower", "upper")
MONOTONE_SLACK = 1e-14


def first_moment_exterior(K: SetK, theta: JumpLaw) -> Exterior:
    """Exterior p = min(1, sum_a a_d ||x - a||^{2-d})."""
    a_d = constant_a_d(theta.dim, theta.Q)
    atoms = K.array.astype(float)
    norm = theta.norm
    exponent = 2 - theta.dim

    def bound(coords: np.ndarray) -> np.ndarray:
        distances = norm.pairwise(coords, atoms)
        return np.minimum(1.0, a_d * np.sum(distances**exponent, axis=1))

    return Exterior.function(bound, label="first-moment")


def _mapped_exterior(exterior: Exterior, transform: Callable[[np.ndarray], np.ndarray], label: str) -> Exterior:
    if exterior.kind == "zero":
        return exterior
    return Exterior.function(lambda coords: transform(exterior.evaluate(coords)), label=label)


@dataclass
class VisitFields:
    K: SetK
    mu: OffspringLaw
    theta: JumpLaw
    p: ScalarField
    s_tilde: ScalarField
    r: ScalarField
    P_bar: ScalarField
    R: ScalarField
    iterations: int
    residual: float
    bracket: str = "lower"
    history: list[float] = field(default_factory=list, repr=False)

    @property
    def box(self) -> Box:
        return self.p.box

    @property
    def in_K(self) -> np.ndarray:
        return site_mask(self.box, self.K)

    @property
    def r_tilde(self) -> ScalarField:
        """One-child non-visit probability 1 - s~."""
        outside = self.s_tilde.exterior
        if outside.kind == "zero":
            exterior = Exterior.constant(1.0)
        else:
            exterior = Exterior.function(lambda coords: 1.0 - outside.evaluate(coords), label="1 - s~")
        return ScalarField(self.box, 1.0 - self.s_tilde.values, exterior, "r~")

    def killing(self) -> KillingField:
        """k = r: the killing of the first-visit decomposition."""
        return KillingField.from_field(self.r, name="k=r")

    def killing_R(self) -> KillingField:
        """k = R: the killing of the last-visit decomposition."""
        return KillingField.from_field(self.R, name="k=R")

    def consistency_residuals(self) -> tuple[float, float]:
        """max off K of |1 - p - phi(1 - s~)| and |1 - r - phi~(1 - s~)|."""
        off = ~self.in_K
        one_minus = 1.0 - self.s_tilde.values[off]
        p_res = np.abs(1.0 - self.p.values[off] - self.mu.phi(one_minus))
        r_res = np.abs(1.0 - self.r.values[off] - self.mu.adjoint().phi(one_minus))
        return (
            float(np.max(p_res)) if p_res.size else 0.0,
            float(np.max(r_res)) if r_res.size else 0.0,
        )

    def fields(self) -> dict[str, ScalarField]:
        return {"p": self.p, "s_tilde": self.s_tilde, "r": self.r, "P_bar": self.P_bar, "R": self.R}

    def export(self, directory: str | Path, fmt: str = "binary") -> list[Path]:
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, f in self.fields().items():
            path = out / (f"{name}.bin" if fmt == "binary" else f"{name}.csv")
            if fmt == "binary":
                f.to_binary(path)
            else:
                f.to_csv(path)
            written.append(path)
        log = out / "convergence.csv"
        write_convergence_log(log, self.history)
        written.append(log)
        return written


def _check_inside(K: SetK, box: Box) -> None:
    if K.dim != box.dim:
        raise BoxError(f"K has dimension {K.dim}, box has {box.dim}")
    if not np.all(box.contains_array(K.array)):
        raise BoxError(f"K is not inside {box}")


def solve_visiting(
    K: SetK,
    mu: OffspringLaw,
    theta: JumpLaw,
    box: Box,
    tol: float = DEFAULT_TOL,
    method: str = "picard",
    bracket: str = "lower",
    max_iters: int | None = None,
) -> VisitFields:
    if method not in SOLVER_METHODS:
        raise ValueError(f"unknown method '{method}'; expected one of {SOLVER_METHODS}")
    if bracket not in BRACKETS:
        raise ValueError(f"unknown bracket '{bracket}'; expected one of {BRACKETS}")
    _check_inside(K, box)

    op = MarkovOperator(theta, box)
    exterior = Exterior.zero() if bracket == "lower" else first_moment_exterior(K, theta)
    boundary = op.boundary(exterior)
    on_K = site_mask(box, K)
    max_iters = max_iters or default_max_iters(op)

    def step(v: np.ndarray) -> np.ndarray:
        out = mu.f_unchecked(np.clip(op.apply(v, boundary), 0.0, 1.0))
        out[on_K] = 1.0
        return out

    p = on_K.astype(float)
    history: list[float] = []
    logger.info(f"solving visiting fields: |K|={len(K)}, box radius {box.radius}, {method}, {bracket} bracket")

    if method == "picard":
        iterations = 0
        for iterations in range(1, max_iters + 1):
            new = step(p)
            drop = float(np.max(p - new))
            if drop > MONOTONE_SLACK:
                raise ConvergenceError("Picard iterates are not monotone", drop, iterations)
            update = float(np.max(new - p))
            history.append(update)
            p = new
            if iterations % 500 == 0:
                logger.debug(f"picard sweep {iterations}: update {update:.3e}")
            if update < tol:
                break
        else:
            raise ConvergenceError("visiting recursion did not converge", history[-1], max_iters)
    else:
        try:
            solution = newton_krylov(
                lambda v: step(v) - v, p, f_tol=tol, maxiter=max_iters, method="lgmres"
            )
        except NoConvergence as exc:
            guess = np.asarray(exc.args[0]) if exc.args else p
            raise ConvergenceError(
                "newton-krylov did not converge", float(np.max(np.abs(step(guess) - guess))), max_iters
            ) from exc
        p = np.clip(solution, 0.0, 1.0)
        p[on_K] = 1.0
        iterations = 0

    residual = float(np.max(np.abs(step(p) - p)))
    if method != "picard":
        history.append(residual)
    logger.info(f"visiting fields converged: {iterations} sweeps, residual {residual:.2e}")
    return _derive(K, mu, theta, box, p, op, boundary, exterior, on_K, iterations, residual, bracket, history)


def _derive(
    K: SetK,
    mu: OffspringLaw,
    theta: JumpLaw,
    box: Box,
    p: np.ndarray,
    op: MarkovOperator,
    boundary: np.ndarray | None,
    exterior: Exterior,
    on_K: np.ndarray,
    iterations: int,
    residual: float,
    bracket: str,
    history: list[float],
) -> VisitFields:
    adjoint: CountLaw = mu.adjoint()
    ap = np.clip(op.apply(p, boundary), 0.0, 1.0)
    s_tilde = np.where(on_K, 1.0, ap)
    r = np.where(on_K, 1.0, 1.0 - adjoint.phi(1.0 - s_tilde))
    P_bar = mu.f_unchecked(ap)
    R = 1.0 - adjoint.phi(1.0 - ap)

    def adjoint_visit(t: np.ndarray) -> np.ndarray:
        return 1.0 - adjoint.phi(1.0 - np.clip(t, 0.0, 1.0))

    adj_ext = _mapped_exterior(exterior, adjoint_visit, f"{exterior.describe()} (adjoint)")
    return VisitFields(
        K=K,
        mu=mu,
        theta=theta,
        p=ScalarField(box, p, exterior, "p"),
        s_tilde=ScalarField(box, s_tilde, exterior, "s~"),
        r=ScalarField(box, np.clip(r, 0.0, 1.0), adj_ext, "r"),
        P_bar=ScalarField(box, P_bar, exterior, "P_bar"),
        R=ScalarField(box, np.clip(R, 0.0, 1.0), adj_ext, "R"),
        iterations=iterations,
        residual=residual,
        bracket=bracket,
        history=history,
    )


@dataclass
class VisitBracket:
    lower: VisitFields
    upper: VisitFields

    def width(self, name: str = "p") -> float:
        return float(np.max(self.upper.fields()[name].values - self.lower.fields()[name].values))


def solve_visiting_bracket(
    K: SetK,
    mu: OffspringLaw,
    theta: JumpLaw,
    box: Box,
    tol: float = DEFAULT_TOL,
    method: str = "picard",
    max_iters: int | None = None,
) -> VisitBracket:
    """Lower and upper truncation brackets on the same box."""
    lower = solve_visiting(K, mu, theta, box, tol, method, "lower", max_iters)
    upper = solve_visiting(K, mu, theta, box, tol, method, "upper", max_iters)
    bracket = VisitBracket(lower, upper)
    logger.info(f"p bracket width on radius {box.radius}: {bracket.width():.3e}")
    return bracket

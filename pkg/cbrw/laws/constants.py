"""
Lattice constants a_d and t_d.

    a_d = Gamma((d-2)/2) / (2 d^{(d-2)/2} pi^{d/2} sqrt(det Q))

is the constant in g(x) ~ a_d ||x||^{2-d}, and

    t_d = d^{d/2} sqrt(det Q) * I_d,   I_d = int_{R^d} |t|^{2-d} |h - t|^{2-d} dt

for any unit vector h. I_d is computed by radial-angular quadrature: the
integrand only depends on rho = |t| and the angle phi between t and h.
"""

from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import gamma

from cbrw.errors import LawError, QuadratureError
from cbrw.laws.jump import JumpLaw
from cbrw.laws.offspring import OffspringLaw

logger = logging.getLogger(__name__)

T_D_REL_TOL = 1e-4


def _sqrt_det(Q: np.ndarray) -> float:
    det = float(np.linalg.det(np.asarray(Q, dtype=float)))
    if det <= 0:
        raise LawError("covariance must be positive definite")
    return float(np.sqrt(det))


def constant_a_d(d: int, Q: np.ndarray) -> float:
    if d < 5:
        raise LawError(f"a_d is used for d >= 5, got d={d}")
    return float(gamma((d - 2) / 2) / (2 * d ** ((d - 2) / 2) * np.pi ** (d / 2) * _sqrt_det(Q)))


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^{n-1} in R^n."""
    return float(2 * np.pi ** (n / 2) / gamma(n / 2))


@lru_cache(maxsize=16)
def convolution_integral(d: int) -> tuple[float, float]:
    """I_d and its absolute error estimate, by nested adaptive quadrature."""
    if d < 5:
        raise LawError(f"the convolution integral diverges for d={d} < 5")
    shell = sphere_area(d - 1)
    exponent = (2 - d) / 2

    def angular(rho: float) -> tuple[float, float]:
        def integrand(phi: float) -> float:
            sq = 1.0 + rho * rho - 2.0 * rho * np.cos(phi)
            return np.sin(phi) ** (d - 2) * sq**exponent

        kink = min(abs(1.0 - rho), np.pi / 2)
        points = [kink] if kink > 1e-8 else None
        value, err = integrate.quad(
            integrand, 0.0, np.pi, points=points, epsabs=1e-13, epsrel=1e-10, limit=200
        )
        return shell * value, shell * err

    inner_errors: list[float] = []

    def radial(rho: float) -> float:
        value, err = angular(rho)
        inner_errors.append(rho * err)
        return rho * value

    total = 0.0
    outer_error = 0.0
    for lo, hi in ((0.0, 0.5), (0.5, 1.0), (1.0, 2.0), (2.0, np.inf)):
        value, err = integrate.quad(radial, lo, hi, epsabs=1e-12, epsrel=1e-9, limit=400)
        total += value
        outer_error += err
    error = outer_error + (max(inner_errors) if inner_errors else 0.0)
    return total, error


def newton_shell_integral(d: int) -> float:
    """Closed form of I_d from the mean-value property of |x|^{2-d}:
    I_d = |S^{d-1}| (1/2 + 1/(d-4))."""
    if d < 5:
        raise LawError(f"the convolution integral diverges for d={d} < 5")
    return sphere_area(d) * (0.5 + 1.0 / (d - 4))


def constant_t_d(d: int, Q: np.ndarray) -> float:
    value, error = convolution_integral(d)
    if not np.isfinite(value) or error > T_D_REL_TOL * abs(value):
        raise QuadratureError(f"t_d quadrature for d={d} did not converge", error / abs(value))
    logger.debug(f"I_{d} = {value:.10g} (error estimate {error:.2e})")
    return float(d ** (d / 2) * _sqrt_det(Q) * value)


def asymptotic_constants(mu: OffspringLaw, theta: JumpLaw, bcap: float) -> dict[str, float]:
    """Limits of rescaled visiting probabilities for a set of capacity bcap.

    p ~ a_d bcap / ||x||^{d-2}, r ~ a_d sigma^2 bcap / (2 ||x||^{d-2}),
    q, q- ~ t_d a_d^2 sigma^2 bcap / (2 ||x||^{d-4}).
    """
    d = theta.dim
    a_d = constant_a_d(d, theta.Q)
    t_d = constant_t_d(d, theta.Q)
    return {
        "a_d": a_d,
        "t_d": t_d,
        "p": a_d * bcap,
        "r": a_d * mu.sigma2 * bcap / 2,
        "q": t_d * a_d**2 * mu.sigma2 * bcap / 2,
        "q_minus": t_d * a_d**2 * mu.sigma2 * bcap / 2,
    }

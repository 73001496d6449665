"""
Path-decomposition identities as linear algebra on the truncated box.

For a in B and b outside B, cutting a path at its first or last visit to a
set gives

    G(a, b) = sum_{z in B^c} Hm^B(a, z) G(z, b) = sum_{z in B} G(a, z) Hm^{B^c}(z, b)
    G(b, a) = sum_{z in B} Hm^{B^c}(b, z) G(z, a) = sum_{z in B^c} G(b, z) Hm^B(z, a)

and the tilted chain P(x, y) = theta(x - y)(1 - k(y)) Es(y) / Es(x) has
expected occupation G_k(z, x) Es(z) / Es(x). Both hold exactly for the
walk absorbed outside the box, so residuals measure solver error only.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from cbrw.errors import BoxError, LatticeError
from cbrw.fields import KillingField, MarkovOperator, ScalarField
from cbrw.killed_walk.walk import KilledWalk, SiteSet, site_mask
from cbrw.laws import JumpLaw

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-13


@dataclass
class IdentityResiduals:
    green_ab: float
    green_ba: float
    first_exit: float  # G(a,b) via first visit to B^c
    last_in: float  # G(a,b) via last visit to B
    first_in: float  # G(b,a) via first visit to B
    last_exit: float  # G(b,a) via last visit to B^c

    @property
    def max_residual(self) -> float:
        return max(self.first_exit, self.last_in, self.first_in, self.last_exit)

    def to_json(self) -> dict[str, float]:
        return {
            "green_ab": self.green_ab,
            "green_ba": self.green_ba,
            "first_exit": self.first_exit,
            "last_in": self.last_in,
            "first_in": self.first_in,
            "last_exit": self.last_exit,
            "max_residual": self.max_residual,
        }


def first_visit_identity_check(
    B: SiteSet,
    k: KillingField,
    a: Sequence[int],
    b: Sequence[int],
    theta: JumpLaw,
    method: str = "sweep",
    tol: float = IDENTITY_TOL,
) -> IdentityResiduals:
    box = k.box
    for point in (a, b):
        if not box.contains(point):
            raise BoxError(f"{tuple(point)} outside {box}")
    inside = site_mask(box, B)
    outside = ~inside
    if not inside[box.local(a)]:
        raise LatticeError(f"a = {tuple(a)} must lie in B")
    if inside[box.local(b)]:
        raise LatticeError(f"b = {tuple(b)} must lie outside B")

    walk = KilledWalk(theta, k, method=method, tol=tol)
    col_a = walk.green_column(a).values
    col_b = walk.green_column(b).values
    row_a = walk.green_row(a).values
    row_b = walk.green_row(b).values
    hm_in_row_a = walk.harmonic_row(inside, a).values
    hm_in_col_a = walk.harmonic_column(inside, a).values
    hm_out_row_b = walk.harmonic_row(outside, b).values
    hm_out_col_b = walk.harmonic_column(outside, b).values

    g_ab = float(col_b[box.local(a)])
    g_ba = float(col_a[box.local(b)])
    result = IdentityResiduals(
        green_ab=g_ab,
        green_ba=g_ba,
        first_exit=abs(g_ab - float(np.sum(hm_in_row_a[outside] * col_b[outside]))),
        last_in=abs(g_ab - float(np.sum(row_a[inside] * hm_out_col_b[inside]))),
        first_in=abs(g_ba - float(np.sum(hm_out_row_b[inside] * col_a[inside]))),
        last_exit=abs(g_ba - float(np.sum(row_b[outside] * hm_in_col_a[outside]))),
    )
    logger.info(f"first-visit identities: max residual {result.max_residual:.3e}")
    return result


def transition_matrix(theta: JumpLaw, killing: KillingField, escape: ScalarField) -> sparse.csr_matrix:
    """P(x, y) = theta(x - y)(1 - k(y)) Es(y) / Es(x) on the box."""
    if np.any(escape.values <= 0):
        raise LatticeError("escape field must be positive on the box")
    reversed_matrix = MarkovOperator(theta.reversed(), escape.box).matrix()
    weight = (1.0 - killing.values) * escape.values
    return (
        sparse.diags(1.0 / escape.ravel()) @ reversed_matrix @ sparse.diags(weight.ravel())
    ).tocsr()


def chain_occupation_check(
    theta: JumpLaw,
    killing: KillingField,
    escape: ScalarField,
    x: Sequence[int],
) -> float:
    """max_z |N(x, z) - G_k(z, x) Es(z) / Es(x)| with N the chain's occupation."""
    box = escape.box
    if killing.box != box:
        raise BoxError("killing and escape fields must share a box")
    P = transition_matrix(theta, killing, escape)
    n = box.size
    start = np.zeros(n)
    start[box.index(x)] = 1.0
    occupation = spsolve((sparse.identity(n, format="csc") - P.T).tocsc(), start)
    walk = KilledWalk(theta, killing, method="direct")
    column = walk.green_column(x).ravel()
    expected = column * escape.ravel() / escape.value_at(x)
    residual = float(np.max(np.abs(occupation - expected)))
    logger.debug(f"chain occupation residual at {tuple(x)}: {residual:.3e}")
    return residual

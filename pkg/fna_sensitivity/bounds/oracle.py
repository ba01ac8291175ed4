"""
Joint-distribution oracle
=========================

Brute-force machinery over the 2x2 joint distribution of ``(Y0, Y1)`` at a
single covariate point.  Given the marginals, the table is pinned down by one
free parameter, the correlation ``rho``, so every claim about the closed-form
bounds can be checked by building the table explicitly and scanning ``rho``.

Nothing here calls the closed-form bound functions: the scan in
:func:`extremize_fna` is an independent code path used to verify them.
"""
from __future__ import annotations

import logging
import math

import numpy as np

from ..exceptions import InfeasibleRho
from ..models import (
    AssociationMeasures,
    Attainability,
    ExtremizeResult,
    JointTable,
    MarginalPair,
    RhoInterval,
)
from .pointwise import feasible_interval

logger = logging.getLogger(__name__)

# Cells more negative than this make a table infeasible.
FEASIBILITY_TOL = 1e-12
DEFAULT_GRID = 10_000


def _cells(mu0: float, mu1: float, s: float, rho: np.ndarray | float):
    pi11 = mu0 * mu1 + rho * s
    pi10 = mu0 - pi11
    pi01 = mu1 - pi11
    pi00 = 1.0 - mu0 - mu1 + pi11
    return pi00, pi01, pi10, pi11


def joint_from_rho(m: MarginalPair, rho: float) -> JointTable:
    """
    Build the unique joint table with marginals *m* and correlation *rho*.

    Raises
    ------
    InfeasibleRho
        When a cell would be negative beyond ``FEASIBILITY_TOL``.
    """
    pi00, pi01, pi10, pi11 = _cells(m.mu0, m.mu1, m.sd_product, rho)
    if min(pi00, pi01, pi10, pi11) < -FEASIBILITY_TOL:
        raise InfeasibleRho(
            f"rho = {rho} gives a negative cell for mu0={m.mu0}, mu1={m.mu1}"
        )
    return JointTable(pi00=pi00, pi01=pi01, pi10=pi10, pi11=pi11)


def measures_of(j: JointTable) -> AssociationMeasures:
    """
    Correlation, risk difference, risk ratio and odds ratio of ``(Y0, Y1)``.

    ``rd`` and ``rr`` compare ``P(Y1 = 1 | Y0 = 1)`` with ``P(Y1 = 1 | Y0 = 0)``.
    ``rr`` and ``or_`` are ``None`` whenever a cell is zero.
    """
    mu0, mu1 = j.mu0, j.mu1
    var = mu0 * (1.0 - mu0) * mu1 * (1.0 - mu1)
    rho = (j.pi11 - mu0 * mu1) / math.sqrt(var) if var > 0.0 else None

    rd = rr = or_ = None
    if FEASIBILITY_TOL < mu0 < 1.0 - FEASIBILITY_TOL:
        p_given_1 = j.pi11 / mu0
        p_given_0 = j.pi01 / (1.0 - mu0)
        rd = p_given_1 - p_given_0
        if min(j.pi00, j.pi01, j.pi10, j.pi11) > FEASIBILITY_TOL:
            rr = p_given_1 / p_given_0
            or_ = (j.pi11 * j.pi00) / (j.pi10 * j.pi01)
    return AssociationMeasures(rho=rho, rd=rd, rr=rr, or_=or_)


def extremize_fna(
    m: MarginalPair,
    ri: RhoInterval,
    grid: int = DEFAULT_GRID,
) -> ExtremizeResult:
    """
    Scan feasible correlations in *ri* and return the extreme harm rates.

    The scan covers ``ri`` intersected with the feasible range, endpoints
    included, and checks every scanned table for nonnegative cells.

    Raises
    ------
    EmptyFeasibleSet
        When *ri* does not meet the feasible range.
    """
    if grid < 2:
        raise ValueError(f"grid must hold at least 2 points, got {grid}")
    scan = feasible_interval(m, ri)
    rhos = np.linspace(scan.rho_l, scan.rho_u, grid)
    cells = np.vstack(_cells(m.mu0, m.mu1, m.sd_product, rhos))
    if np.any(cells < -FEASIBILITY_TOL):
        bad = rhos[np.any(cells < -FEASIBILITY_TOL, axis=0)][0]
        raise InfeasibleRho(f"scanned rho = {bad} gives a negative cell")

    pi10 = cells[2]
    lo, hi = int(np.argmin(pi10)), int(np.argmax(pi10))
    logger.debug("scanned %d points over [%r, %r]", grid, scan.rho_l, scan.rho_u)
    return ExtremizeResult(
        min_fna=float(max(pi10[lo], 0.0)),
        max_fna=float(min(pi10[hi], 1.0)),
        witness_low=joint_from_rho(m, float(rhos[lo])),
        witness_high=joint_from_rho(m, float(rhos[hi])),
        rho_low=float(rhos[lo]),
        rho_high=float(rhos[hi]),
    )


def fh_attainability(j: JointTable) -> Attainability:
    """Which Frechet-Hoeffding bound the harm rate of *j* sits on."""
    tol = FEASIBILITY_TOL
    return Attainability(
        lower_attained=j.pi01 <= tol or j.pi10 <= tol,
        upper_attained=j.pi11 <= tol or j.pi00 <= tol,
    )

"""
Pointwise bounds on the fraction negatively affected
=====================================================

Closed-form bound arithmetic at a single covariate point ``x`` with
conditional outcome means ``mu0 = E[Y0 | x]`` and ``mu1 = E[Y1 | x]``.

Notation used throughout:

* ``b   = mu0 * (1 - mu1)``  harm rate under conditional independence
* ``s   = sqrt(mu0 (1 - mu0) mu1 (1 - mu1))``  product of standard deviations
* ``tau = mu1 - mu0``

For a correlation ``rho = Corr(Y0, Y1 | x)`` the harm rate is exactly
``b - rho * s``, which is why every bound below is linear in the correlation
endpoints before the outer ``max``/``min`` caps.

Scalar functions take :class:`~fna_sensitivity.models.MarginalPair` values;
the ``*_arrays`` helpers evaluate the same formulas on numpy vectors and are
what the estimators use on per-unit nuisance predictions.
"""
from __future__ import annotations

import logging
import math
from typing import Tuple

import numpy as np

from ..exceptions import DegenerateMarginal, EmptyFeasibleSet, InfeasibleRho, NotApplicable
from ..models import (
    BoundPair,
    LowerBoundDecomposition,
    MarginalPair,
    RhoInterval,
    UpperBoundCaps,
)

logger = logging.getLogger(__name__)

# Correlation endpoints this close outside the feasible range are clamped.
CLAMP_TOL = 1e-9
# Slack allowed when a lower bound meets an upper bound.
BOUND_TOL = 1e-12


def _clip01(value: float) -> float:
    return min(max(value, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Frechet-Hoeffding bounds and the feasible correlation range
# ---------------------------------------------------------------------------


def fh_bounds(m: MarginalPair) -> BoundPair:
    """Sharp bounds from the marginals alone: ``[max(mu0 - mu1, 0), min(mu0, 1 - mu1)]``."""
    return BoundPair(max(m.mu0 - m.mu1, 0.0), min(m.mu0, 1.0 - m.mu1))


def rho_feasible_range(m: MarginalPair) -> RhoInterval:
    """
    Range of correlations compatible with the marginals.

    Raises
    ------
    DegenerateMarginal
        When either marginal is 0 or 1 (the correlation is undefined).
    """
    if m.is_degenerate:
        raise DegenerateMarginal(
            f"correlation undefined for degenerate marginals mu0={m.mu0}, mu1={m.mu1}"
        )
    s = m.sd_product
    lower = -min((1.0 - m.mu0) * (1.0 - m.mu1), m.mu0 * m.mu1) / s
    upper = min(m.mu0 * (1.0 - m.mu1), m.mu1 * (1.0 - m.mu0)) / s
    return RhoInterval(max(lower, -1.0), min(upper, 1.0))


def feasible_interval(m: MarginalPair, ri: RhoInterval) -> RhoInterval:
    """
    Intersect *ri* with the feasible range of *m*.

    This is the redefinition ``rho_l <- max(rho_l, L_rho)``,
    ``rho_u <- min(rho_u, U_rho)`` that makes any prior range admissible.
    """
    feasible = rho_feasible_range(m)
    lo = max(ri.rho_l, feasible.rho_l)
    hi = min(ri.rho_u, feasible.rho_u)
    if lo > hi:
        raise EmptyFeasibleSet(
            f"[{ri.rho_l}, {ri.rho_u}] does not meet the feasible range "
            f"[{feasible.rho_l}, {feasible.rho_u}]"
        )
    return RhoInterval(lo, hi)


def _clamped(m: MarginalPair, ri: RhoInterval) -> RhoInterval:
    feasible = rho_feasible_range(m)
    if ri.rho_l < feasible.rho_l - CLAMP_TOL or ri.rho_u > feasible.rho_u + CLAMP_TOL:
        raise InfeasibleRho(
            f"[{ri.rho_l}, {ri.rho_u}] is outside the feasible range "
            f"[{feasible.rho_l:.6g}, {feasible.rho_u:.6g}]; clamp it with feasible_interval()"
        )
    if ri.rho_l < feasible.rho_l or ri.rho_u > feasible.rho_u:
        logger.debug("clamping [%r, %r] to the feasible range", ri.rho_l, ri.rho_u)
    lo = max(ri.rho_l, feasible.rho_l)
    hi = min(ri.rho_u, feasible.rho_u)
    return RhoInterval(min(lo, hi), hi)


def _clamped_rho(m: MarginalPair, rho: float) -> float:
    if not math.isfinite(rho) or abs(rho) > 1.0 + CLAMP_TOL:
        raise InfeasibleRho(f"correlation {rho!r} lies outside [-1, 1]")
    return _clamped(m, RhoInterval.point(min(max(rho, -1.0), 1.0))).rho_l


# ---------------------------------------------------------------------------
# Sensitivity bounds
# ---------------------------------------------------------------------------


def sensitivity_bounds(m: MarginalPair, ri: RhoInterval) -> BoundPair:
    """
    Sharp bounds when ``rho_l <= Corr(Y0, Y1 | x) <= rho_u`` inside the feasible range.

    ``lower = max(b - rho_u s, 0)`` and ``upper = max(b - rho_l s, 0)``.

    Raises
    ------
    InfeasibleRho
        When *ri* leaves the feasible range by more than ``CLAMP_TOL``.
    """
    b = m.independent_fna
    if m.is_degenerate:
        v = _clip01(max(b, 0.0))
        return BoundPair(v, v)
    ri = _clamped(m, ri)
    s = m.sd_product
    lower = max(b - ri.rho_u * s, 0.0)
    upper = max(b - ri.rho_l * s, 0.0)
    return BoundPair(_clip01(lower), _clip01(max(upper, lower)))


def general_bounds(m: MarginalPair, ri: RhoInterval) -> BoundPair:
    """
    Sharp bounds for an arbitrary correlation range, capped by the FH envelope.

    Reduces to :func:`sensitivity_bounds` when *ri* lies inside the feasible
    range and to :func:`fh_bounds` when *ri* is the whole feasible range.

    Raises
    ------
    EmptyFeasibleSet
        When *ri* does not intersect the feasible range, so no joint
        distribution satisfies the assumption.
    """
    b = m.independent_fna
    s = m.sd_product
    lower = max(b - ri.rho_u * s, m.mu0 - m.mu1, 0.0)
    upper = min(m.mu0, 1.0 - m.mu1, max(b - ri.rho_l * s, 0.0))
    if lower > upper + BOUND_TOL:
        raise EmptyFeasibleSet(
            f"no joint distribution with mu0={m.mu0}, mu1={m.mu1} has a correlation "
            f"in [{ri.rho_l}, {ri.rho_u}]"
        )
    lower = _clip01(lower)
    return BoundPair(lower, max(_clip01(upper), lower))


def fna_given_rho(m: MarginalPair, rho: float) -> float:
    """Harm rate identified by a known correlation: ``b - rho * s``."""
    if m.is_degenerate:
        return _clip01(m.independent_fna)
    rho = _clamped_rho(m, rho)
    return _clip01(m.independent_fna - rho * m.sd_product)


def fpa_bounds(m: MarginalPair, ri: RhoInterval) -> BoundPair:
    """Bounds on the fraction positively affected, ``FPA(x) = FNA(x) + tau(x)``."""
    fna = general_bounds(m, ri)
    lower = _clip01(fna.lower + m.tau)
    return BoundPair(lower, max(_clip01(fna.upper + m.tau), lower))


# ---------------------------------------------------------------------------
# Informativeness thresholds and factored forms
# ---------------------------------------------------------------------------


def rho_star_threshold(m: MarginalPair) -> float:
    """
    Smallest ``rho_u`` at which the lower bound hits zero (requires ``tau > 0``).

    Equals the feasible upper correlation and ``sqrt(1 / OR_AY)``.

    Raises
    ------
    NotApplicable
        When ``tau <= 0``; the lower bound is then positive for every ``rho_u``.
    """
    if m.is_degenerate:
        raise DegenerateMarginal(f"threshold undefined for mu0={m.mu0}, mu1={m.mu1}")
    if m.tau <= 0.0:
        raise NotApplicable(f"tau = {m.tau} <= 0: the lower bound is already positive")
    return math.sqrt(m.mu0 * (1.0 - m.mu1) / ((1.0 - m.mu0) * m.mu1))


def rho_star_from_odds_ratio(or_ay: float) -> float:
    """Threshold as a function of the treatment-outcome odds ratio alone."""
    if not or_ay > 1.0:
        raise NotApplicable(f"odds ratio {or_ay} <= 1 implies tau <= 0")
    return math.sqrt(1.0 / or_ay)


def _factored(m: MarginalPair, rho: float) -> Tuple[float, float]:
    """Return ``(max(-tau + (1 - rho^2)(1 - mu0) mu1, 0), weight)``."""
    c = (1.0 - m.mu0) * m.mu1
    root_b = math.sqrt(m.independent_fna)
    head = max(-m.tau + (1.0 - rho * rho) * c, 0.0)
    return head, root_b / (root_b + rho * math.sqrt(c))


def lower_bound_decomposed(m: MarginalPair, rho_u: float) -> LowerBoundDecomposition:
    """
    Lower bound written as ``max(-tau + (1 - rho_u^2)(1 - mu0) mu1, 0) * weight``.

    ``harmful_best_case`` is true exactly when the lower bound is positive,
    i.e. when ``tau < (1 - rho_u^2)(1 - mu0) mu1``.
    """
    feasible = rho_feasible_range(m)
    if rho_u < -CLAMP_TOL or rho_u > feasible.rho_u + CLAMP_TOL:
        raise InfeasibleRho(
            f"rho_u = {rho_u} must lie in [0, {feasible.rho_u:.6g}] for the factored form"
        )
    rho_u = min(max(rho_u, 0.0), feasible.rho_u)
    head, weight = _factored(m, rho_u)
    harmful = m.tau < (1.0 - rho_u * rho_u) * (1.0 - m.mu0) * m.mu1
    return LowerBoundDecomposition(head * weight, harmful)


def upper_bound_decomposed(m: MarginalPair, rho_l: float) -> float:
    """Factored form of the upper bound for a nonnegative ``rho_l``."""
    feasible = rho_feasible_range(m)
    if rho_l < -CLAMP_TOL or rho_l > feasible.rho_u + CLAMP_TOL:
        raise InfeasibleRho(
            f"rho_l = {rho_l} must lie in [0, {feasible.rho_u:.6g}] for the factored form"
        )
    head, weight = _factored(m, min(max(rho_l, 0.0), feasible.rho_u))
    return head * weight


def upper_bound_caps(m: MarginalPair) -> UpperBoundCaps:
    """Caps ``(1 - tau) / 2`` on the FH upper bound and ``(1 - tau)^2 / 4`` on ``b``."""
    half = (1.0 - m.tau) / 2.0
    return UpperBoundCaps(fh_cap=half, indep_cap=half * half)


def policy_harm_free(m: MarginalPair, cost: float, rho_u: float) -> bool:
    """
    Whether treating when ``tau > cost`` has a harm-free best case at this point.

    True when ``cost >= (1 - rho_u^2)(1 - mu0) mu1``, the testable safety
    criterion for threshold policies.
    """
    return cost >= (1.0 - rho_u * rho_u) * (1.0 - m.mu0) * m.mu1


# ---------------------------------------------------------------------------
# Vectorised helpers
# ---------------------------------------------------------------------------


def sd_product_arrays(mu0: np.ndarray, mu1: np.ndarray) -> np.ndarray:
    v = mu0 * (1.0 - mu0) * mu1 * (1.0 - mu1)
    return np.sqrt(np.maximum(v, 0.0))


def g_arrays(mu0: np.ndarray, mu1: np.ndarray, rho: float) -> np.ndarray:
    """Uncapped harm-rate function ``b - rho * s`` evaluated per unit."""
    return mu0 * (1.0 - mu1) - rho * sd_product_arrays(mu0, mu1)


def beta_integrand_arrays(mu0: np.ndarray, mu1: np.ndarray, rho: float) -> np.ndarray:
    """``max(b - rho * s, 0)`` per unit; its mean over ``X`` is ``beta_rho``."""
    return np.maximum(g_arrays(mu0, mu1, rho), 0.0)


def fh_bounds_arrays(mu0: np.ndarray, mu1: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return np.maximum(mu0 - mu1, 0.0), np.minimum(mu0, 1.0 - mu1)


def rho_feasible_range_arrays(
    mu0: np.ndarray,
    mu1: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Per-unit feasible correlation range.

    Returns
    -------
    (lower, upper, valid)
        ``valid`` flags units with interior marginals; ``lower``/``upper``
        are NaN where it is false.
    """
    mu0 = np.asarray(mu0, dtype=float)
    mu1 = np.asarray(mu1, dtype=float)
    valid = (mu0 > 0.0) & (mu0 < 1.0) & (mu1 > 0.0) & (mu1 < 1.0)
    s = sd_product_arrays(mu0, mu1)
    lower = np.full(mu0.shape, np.nan)
    upper = np.full(mu0.shape, np.nan)
    lo_num = np.minimum((1.0 - mu0) * (1.0 - mu1), mu0 * mu1)
    hi_num = np.minimum(mu0 * (1.0 - mu1), mu1 * (1.0 - mu0))
    lower[valid] = np.maximum(-lo_num[valid] / s[valid], -1.0)
    upper[valid] = np.minimum(hi_num[valid] / s[valid], 1.0)
    return lower, upper, valid

"""
Cross-fitted estimators
=======================

Sample-mean estimators built on the influence functions in
:mod:`~fna_sensitivity.estimators.influence`, each reported with an
influence-function standard error and a Wald interval:

* :func:`estimate_beta`        ``beta_rho`` at one correlation
* :func:`sensitivity_curve`    ``beta_rho`` along a grid
* :func:`policy_bounds`        harm among units a policy treats
* :func:`dr_ate`               doubly robust average treatment effect

Estimates are not clamped to [0, 1]; at small n they may leave it.
"""
from __future__ import annotations

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm

from ..bounds.pointwise import fh_bounds_arrays
from ..exceptions import InvalidInput, MisalignedFit
from ..models import (
    BoundPair,
    CurveReport,
    Dataset,
    EstimateReport,
    NuisanceFit,
    PolicyBounds,
    RhoInterval,
)
from .influence import check_alignment, g_value, phi_beta, phi_gamma

logger = logging.getLogger(__name__)

DEFAULT_LEVEL = 0.95


def z_quantile(level: float) -> float:
    """Two-sided standard-normal critical value for a *level* interval."""
    if not (0.0 < level < 1.0):
        raise InvalidInput(f"level must lie in (0, 1), got {level!r}")
    return float(norm.ppf(0.5 + level / 2.0))


def _report(
    summand: np.ndarray,
    level: float,
    rho: Optional[float],
    target: str,
    warnings: Tuple[str, ...] = (),
) -> EstimateReport:
    n = len(summand)
    estimate = float(np.mean(summand))
    # Plug-in variance with divisor n.
    variance = float(np.mean((summand - estimate) ** 2))
    se = float(np.sqrt(variance / n))
    half = z_quantile(level) * se
    return EstimateReport(
        estimate=estimate,
        se=se,
        ci_lower=estimate - half,
        ci_upper=estimate + half,
        level=level,
        n=n,
        rho=rho,
        target=target,
        warnings=warnings,
    )


def _weights(data: Dataset, weights: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if weights is None:
        return None
    w = np.asarray(weights, dtype=float)
    if w.shape != (data.n,):
        raise MisalignedFit(f"policy has shape {w.shape}, expected ({data.n},)")
    return w


class _Pieces:
    """Influence-function values shared by every ``rho`` of one fit."""

    def __init__(self, data: Dataset, fit: NuisanceFit) -> None:
        check_alignment(data, fit)
        args = (data.outcome, data.treatment, fit.e_hat, fit.mu0_hat, fit.mu1_hat)
        self.fit = fit
        self.phi_beta = phi_beta(*args)
        self.phi_gamma = phi_gamma(*args)

    def summand(self, rho: float) -> np.ndarray:
        if rho == 0.0:
            return self.phi_beta
        g = g_value(self.fit.mu0_hat, self.fit.mu1_hat, rho)
        return np.where(g >= 0.0, self.phi_beta - rho * self.phi_gamma, 0.0)

    def cap_warnings(self, rho: float) -> Tuple[str, ...]:
        if rho >= 0.0:
            return ()
        g = g_value(self.fit.mu0_hat, self.fit.mu1_hat, rho)
        cap = np.minimum(self.fit.mu0_hat, 1.0 - self.fit.mu1_hat)
        over = int(np.sum(g > cap))
        if not over:
            return ()
        msg = (f"rho = {rho}: the uncapped harm rate exceeds min(mu0, 1 - mu1) for "
               f"{over} of {len(g)} units; the estimate targets the uncapped quantity")
        logger.warning(msg)
        return (msg,)


def estimate_beta(
    data: Dataset,
    fit: NuisanceFit,
    rho: float,
    level: float = DEFAULT_LEVEL,
    weights: Optional[np.ndarray] = None,
) -> EstimateReport:
    """
    Cross-fitted estimate of ``beta_rho``.

    At ``rho == 0`` the summand is ``phi_beta`` with no indicator; otherwise
    it is ``I{g >= 0} (phi_beta - rho * phi_gamma)`` evaluated per unit.
    Optional *weights* multiply every summand (a policy ``d(X)``).
    """
    if not -1.0 <= rho <= 1.0:
        raise InvalidInput(f"rho must lie in [-1, 1], got {rho!r}")
    pieces = _Pieces(data, fit)
    w = _weights(data, weights)
    summand = pieces.summand(rho)
    if w is not None:
        summand = summand * w
    return _report(summand, level, rho, "beta", pieces.cap_warnings(rho))


def sensitivity_curve(
    data: Dataset,
    fit: NuisanceFit,
    rho_grid: Sequence[float],
    level: float = DEFAULT_LEVEL,
) -> CurveReport:
    """:func:`estimate_beta` at every point of an ascending *rho_grid*."""
    grid = np.asarray(rho_grid, dtype=float).ravel()
    if grid.size == 0:
        raise InvalidInput("rho grid is empty")
    if np.any(np.diff(grid) < 0.0):
        raise InvalidInput("rho grid must be sorted ascending")
    if np.any(np.abs(grid) > 1.0):
        raise InvalidInput("rho grid values must lie in [-1, 1]")

    pieces = _Pieces(data, fit)
    reports = [
        _report(pieces.summand(float(r)), level, float(r), "beta", pieces.cap_warnings(float(r)))
        for r in grid
    ]
    return CurveReport(
        rho_grid=grid,
        estimates=np.array([r.estimate for r in reports]),
        se=np.array([r.se for r in reports]),
        ci_lower=np.array([r.ci_lower for r in reports]),
        ci_upper=np.array([r.ci_upper for r in reports]),
        level=level,
        n=data.n,
        warnings=tuple(w for r in reports for w in r.warnings),
    )


def policy_bounds(
    data: Dataset,
    fit: NuisanceFit,
    policy: np.ndarray,
    ri: RhoInterval,
    level: float = DEFAULT_LEVEL,
) -> PolicyBounds:
    """
    Bounds on ``FNA(d) = E[FNA(X) d(X)]`` for a binary policy *d*.

    The lower bound is the weighted estimate at ``rho_u`` and the upper bound
    the weighted estimate at ``rho_l``.
    """
    d = np.asarray(policy)
    if d.shape != (data.n,):
        raise MisalignedFit(f"policy has shape {d.shape}, expected ({data.n},)")
    if not np.all((d == 0) | (d == 1)):
        raise InvalidInput("policy must contain only 0/1 values")
    lower = estimate_beta(data, fit, ri.rho_u, level, weights=d)
    upper = estimate_beta(data, fit, ri.rho_l, level, weights=d)
    return PolicyBounds(lower=lower, upper=upper)


def dr_ate(data: Dataset, fit: NuisanceFit, level: float = DEFAULT_LEVEL) -> EstimateReport:
    """Augmented inverse-probability-weighted estimate of ``E[Y1 - Y0]``."""
    check_alignment(data, fit)
    y = data.outcome.astype(float)
    a = data.treatment.astype(float)
    e, mu0, mu1 = fit.e_hat, fit.mu0_hat, fit.mu1_hat
    summand = a * (y - mu1) / e - (1.0 - a) * (y - mu0) / (1.0 - e) + mu1 - mu0
    return _report(summand, level, None, "ate")


def fh_population_bounds(fit: NuisanceFit) -> BoundPair:
    """Plug-in means of the per-unit Frechet-Hoeffding bounds."""
    lower, upper = fh_bounds_arrays(fit.mu0_hat, fit.mu1_hat)
    return BoundPair(float(np.mean(lower)), float(np.mean(upper)))

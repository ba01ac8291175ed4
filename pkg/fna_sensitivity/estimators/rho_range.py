"""
Data-driven sensitivity range
=============================

The marginals at each unit restrict which correlations are possible.  Looking
at the per-unit feasible upper limits ``U_rho(X_i)`` across the sample shows
which values of ``rho_u`` are worth considering: a ``rho_u`` above most of
them just reproduces the Frechet-Hoeffding lower bound.
"""
from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np

from ..bounds.pointwise import rho_feasible_range_arrays
from ..exceptions import DegenerateMarginal, InvalidInput
from ..models import NuisanceFit, RhoRangeSelection

logger = logging.getLogger(__name__)

DEFAULT_QUANTILE = 0.95


def rho_upper_selection(
    fit: NuisanceFit,
    quantile: float = DEFAULT_QUANTILE,
    step: Optional[float] = None,
    rho_u: Optional[float] = None,
) -> RhoRangeSelection:
    """
    Pick ``rho_u`` as an empirical quantile of the per-unit feasible upper limits.

    Parameters
    ----------
    fit:
        Nuisance predictions supplying ``(mu0_hat, mu1_hat)`` per unit.
    quantile:
        Quantile of ``{U_rho(X_i)}`` to use (default 0.95).
    step:
        When given, round the quantile up to the next multiple of *step*.
    rho_u:
        Use this value instead of the quantile; only the coverage is computed.

    Units with degenerate marginals are skipped and counted.
    """
    if not (0.0 < quantile < 1.0):
        raise InvalidInput(f"quantile must lie in (0, 1), got {quantile!r}")
    if step is not None and step <= 0.0:
        raise InvalidInput(f"step must be positive, got {step!r}")
    lower, upper, valid = rho_feasible_range_arrays(fit.mu0_hat, fit.mu1_hat)
    skipped = int(np.sum(~valid))
    if skipped:
        logger.warning("skipped %d units with degenerate marginals", skipped)
    if not valid.any():
        raise DegenerateMarginal("every unit has a degenerate marginal")
    upper, lower = upper[valid], lower[valid]

    chosen = float(np.quantile(upper, quantile))
    if step is not None:
        chosen = min(math.ceil(chosen / step - 1e-9) * step, 1.0)
    if rho_u is not None:
        chosen = float(rho_u)

    coverage = float(np.mean(upper <= chosen))
    logger.info("rho_u = %.4f covers %.1f%% of %d units", chosen, 100 * coverage, len(upper))
    return RhoRangeSelection(
        rho_u=chosen,
        coverage=coverage,
        quantile=quantile,
        per_unit_upper=upper,
        per_unit_lower=lower,
        skipped=skipped,
    )

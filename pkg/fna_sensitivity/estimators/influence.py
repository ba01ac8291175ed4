"""
Influence functions
===================

Per-unit influence-function values for the two building blocks of the
sensitivity estimand ``beta_rho = E[max(b(X) - rho * s(X), 0)]``:

* ``phi_beta``  for ``beta_0 = E[mu0 (1 - mu1)]``
* ``phi_gamma`` for ``gamma  = E[sqrt(mu0 (1 - mu0) mu1 (1 - mu1))]``

and their indicator-gated combination
``varphi = I{g >= 0} * (phi_beta - rho * phi_gamma)`` with ``g = b - rho * s``.

All functions broadcast over numpy arrays; scalars work too.
"""
from __future__ import annotations

import numpy as np

from ..exceptions import MisalignedFit
from ..models import Dataset, InfluenceTable, NuisanceFit


def phi_beta(y, a, e, mu0, mu1):
    """Influence function of ``E[mu0 (1 - mu1)]`` (uncentred)."""
    y = np.asarray(y, dtype=float)
    a = np.asarray(a, dtype=float)
    control = (1.0 - a) * (y - mu0) / (1.0 - e) * (1.0 - mu1)
    treated = a * (y - mu1) / e * mu0
    return control - treated + mu0 * (1.0 - mu1)


def phi_gamma(y, a, e, mu0, mu1):
    """Influence function of ``E[sqrt(mu0 (1 - mu0) mu1 (1 - mu1))]`` (uncentred)."""
    y = np.asarray(y, dtype=float)
    a = np.asarray(a, dtype=float)
    v0 = mu0 * (1.0 - mu0)
    v1 = mu1 * (1.0 - mu1)
    treated = (1.0 - 2.0 * mu1) / 2.0 * np.sqrt(v0 / v1) * a * (y - mu1) / e
    control = (1.0 - 2.0 * mu0) / 2.0 * np.sqrt(v1 / v0) * (1.0 - a) * (y - mu0) / (1.0 - e)
    return treated + control + np.sqrt(v0 * v1)


def g_value(mu0, mu1, rho: float):
    """``mu0 (1 - mu1) - rho * sqrt(mu0 (1 - mu0) mu1 (1 - mu1))``."""
    return mu0 * (1.0 - mu1) - rho * np.sqrt(mu0 * (1.0 - mu0) * mu1 * (1.0 - mu1))


def check_alignment(data: Dataset, fit: NuisanceFit) -> None:
    if fit.n != data.n:
        raise MisalignedFit(f"nuisance fit has {fit.n} rows but the dataset has {data.n}")


def influence_table(data: Dataset, fit: NuisanceFit, rho: float) -> InfluenceTable:
    """Evaluate every influence-function piece for each unit at *rho*."""
    check_alignment(data, fit)
    args = (data.outcome, data.treatment, fit.e_hat, fit.mu0_hat, fit.mu1_hat)
    pb = phi_beta(*args)
    pg = phi_gamma(*args)
    g = g_value(fit.mu0_hat, fit.mu1_hat, rho)
    varphi = np.where(g >= 0.0, pb - rho * pg, 0.0)
    return InfluenceTable(rho=rho, phi_beta=pb, phi_gamma=pg, g_value=g, varphi=varphi)

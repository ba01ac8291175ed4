"""
Truth oracles
=============

Population quantities of a :class:`~fna_sensitivity.models.DgpSpec`,
computed by integrating over ``X`` with an outer Monte Carlo sample and over
the latent ``U`` either with an inner Monte Carlo sample or with
Gauss-Hermite quadrature.
"""
from __future__ import annotations

import logging
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit

from ..bounds.pointwise import beta_integrand_arrays, fh_bounds
from ..exceptions import InvalidInput
from ..models import DgpSpec, MarginalPair, ToyExample
from .dgp import QUADRATURE_NODES, conditional_means, linear_predictor, quadrature_rule

logger = logging.getLogger(__name__)

DEFAULT_OUTER = 100_000
DEFAULT_INNER = 1000
INTEGRATORS = ("monte_carlo", "quadrature")
# Inner draws held in memory at once.
_BLOCK = 2_000_000


def _outer_sample(spec: DgpSpec, n_outer: int, seed: Optional[int]) -> Tuple[np.random.Generator, np.ndarray]:
    if n_outer < 1:
        raise InvalidInput(f"n_outer must be at least 1, got {n_outer}")
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    return rng, rng.standard_normal((n_outer, spec.p))


def _monte_carlo_means(
    spec: DgpSpec,
    x: np.ndarray,
    n_inner: int,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    lin0 = linear_predictor(spec.outcome0, x)
    lin1 = linear_predictor(spec.outcome1, x)
    l0, l1 = spec.outcome0.u_loading, spec.outcome1.u_loading
    mu0 = np.empty(len(x))
    mu1 = np.empty(len(x))
    rows = max(1, _BLOCK // n_inner)
    for start in range(0, len(x), rows):
        stop = min(start + rows, len(x))
        u = rng.standard_normal((stop - start, n_inner))
        mu0[start:stop] = expit(lin0[start:stop, None] + l0 * u).mean(axis=1)
        mu1[start:stop] = expit(lin1[start:stop, None] + l1 * u).mean(axis=1)
    return mu0, mu1


@lru_cache(maxsize=256)
def true_beta(
    spec: DgpSpec,
    rho: float,
    n_outer: int = DEFAULT_OUTER,
    n_inner: int = DEFAULT_INNER,
    seed: Optional[int] = None,
    integrator: str = "monte_carlo",
) -> float:
    """
    ``beta_rho = E[max(mu0 (1 - mu1) - rho * s, 0)]`` under *spec*.

    For each of *n_outer* draws of ``X`` the conditional means are integrated
    over ``U`` with *n_inner* latent draws (``integrator="monte_carlo"``) or
    by Gauss-Hermite quadrature (``integrator="quadrature"``).  Results are
    cached per argument tuple.
    """
    if integrator not in INTEGRATORS:
        raise InvalidInput(f"integrator must be one of {INTEGRATORS}, got {integrator!r}")
    if n_inner < 1:
        raise InvalidInput(f"n_inner must be at least 1, got {n_inner}")
    rng, x = _outer_sample(spec, n_outer, seed)
    if integrator == "quadrature":
        mu0, mu1 = conditional_means(spec, x)
    else:
        mu0, mu1 = _monte_carlo_means(spec, x, n_inner, rng)
    value = float(np.mean(beta_integrand_arrays(mu0, mu1, rho)))
    logger.debug("true beta for %s at rho=%r: %.5f (%s)", spec.case_id, rho, value, integrator)
    return value


def true_fna(spec: DgpSpec, n_outer: int = DEFAULT_OUTER, seed: Optional[int] = None) -> float:
    """``P(Y0 = 1, Y1 = 0)`` with ``U`` integrated out by quadrature."""
    _, x = _outer_sample(spec, n_outer, seed)
    u, w = quadrature_rule(QUADRATURE_NODES)
    lin0 = linear_predictor(spec.outcome0, x)
    lin1 = linear_predictor(spec.outcome1, x)
    total = 0.0
    for ui, wi in zip(u, w):
        p0 = expit(lin0 + spec.outcome0.u_loading * ui)
        p1 = expit(lin1 + spec.outcome1.u_loading * ui)
        total += wi * float(np.mean(p0 * (1.0 - p1)))
    return total


def true_ate(spec: DgpSpec, n_outer: int = DEFAULT_OUTER, seed: Optional[int] = None) -> float:
    """``E[Y1 - Y0]`` under *spec*."""
    _, x = _outer_sample(spec, n_outer, seed)
    mu0, mu1 = conditional_means(spec, x)
    return float(np.mean(mu1 - mu0))


def toy_example(shift: float = 1.0, u_values: Tuple[float, float] = (0.0, 2.0)) -> ToyExample:
    """
    Exact quantities for a single covariate point with a two-point latent variable.

    ``U`` is uniform on *u_values*, ``Y1 ~ expit(shift + U)`` and
    ``Y0 ~ expit(U)``, independent given ``U``.
    """
    u = np.asarray(u_values, dtype=float)
    p0 = expit(u)
    p1 = expit(shift + u)
    mu0 = float(p0.mean())
    mu1 = float(p1.mean())
    pi11 = float(np.mean(p0 * p1))
    fna = float(np.mean(p0 * (1.0 - p1)))
    m = MarginalPair(mu0, mu1)
    rho = (pi11 - mu0 * mu1) / m.sd_product
    return ToyExample(
        mu0=mu0,
        mu1=mu1,
        fna=fna,
        rho=rho,
        independent_fna=m.independent_fna,
        sd_product=m.sd_product,
        fh=fh_bounds(m),
    )

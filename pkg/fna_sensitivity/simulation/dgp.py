"""
Data-generating processes
=========================

Logistic designs with a latent confounder of the two potential outcomes::

    X ~ N(0, I_p),  U ~ N(0, 1)
    A | X       ~ Bernoulli(expit(c + X'gamma))
    Y_a | X, U  ~ Bernoulli(expit(b_a + X'alpha_a + l_a * U)),  a = 0, 1

``Y0`` and ``Y1`` are independent given ``(X, U)``; their dependence given
``X`` alone comes from ``U``.  Six named cases are built in:

* ``C1``-``C3``: p = 2, ``A ~ expit((X1 - X2) / 2)``,
  ``Y0 ~ expit((X1 + X2) / 2 + l0 U)``, ``Y1 ~ expit((X1 + X2) / 2 + 1 + l1 U)``
  with ``(l0, l1)`` = (3, 1.5), (2, 1), (1, 0.5).
* ``C4``-``C6``: p = 20 / 50 / 100 with geometric coefficients
  ``alpha = (1, 1/2, ..., 1/2^(p-1))``, ``Y1 ~ expit(X'alpha + 1 + U)``,
  ``Y0 ~ expit(X'alpha + U)``.
"""
from __future__ import annotations

import logging
from functools import lru_cache
from typing import Dict, Tuple, Union

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import expit

from ..exceptions import InvalidInput
from ..models import Dataset, DgpSpec, LatentTruth, ModelSpec, OutcomeSpec, SimulatedSample

logger = logging.getLogger(__name__)

SeedLike = Union[None, int, np.random.SeedSequence, np.random.Generator]

# Gauss-Hermite nodes used for E_U[expit(.)].
QUADRATURE_NODES = 80
_CHUNK = 50_000

_LOW_DIM_LOADINGS: Dict[str, Tuple[float, float]] = {
    "C1": (3.0, 1.5),
    "C2": (2.0, 1.0),
    "C3": (1.0, 0.5),
}
_HIGH_DIM_P: Dict[str, int] = {"C4": 20, "C5": 50, "C6": 100}

CASE_IDS = tuple(_LOW_DIM_LOADINGS) + tuple(_HIGH_DIM_P)


def _propensity_coefficients(p: int) -> Tuple[float, ...]:
    coef = [0.0] * p
    coef[0] = 0.5
    coef[1] = -0.5
    return tuple(coef)


def case_spec(case_id: str, seed: int = 0) -> DgpSpec:
    """Build the named case ``C1``..``C6``."""
    key = case_id.upper()
    if key in _LOW_DIM_LOADINGS:
        l0, l1 = _LOW_DIM_LOADINGS[key]
        slopes = (0.5, 0.5)
        return DgpSpec(
            case_id=key,
            p=2,
            propensity=_propensity_coefficients(2),
            outcome0=OutcomeSpec(0.0, slopes, l0),
            outcome1=OutcomeSpec(1.0, slopes, l1),
            seed=seed,
        )
    if key in _HIGH_DIM_P:
        p = _HIGH_DIM_P[key]
        alpha = tuple(0.5 ** j for j in range(p))
        return DgpSpec(
            case_id=key,
            p=p,
            propensity=_propensity_coefficients(p),
            outcome0=OutcomeSpec(0.0, alpha, 1.0),
            outcome1=OutcomeSpec(1.0, alpha, 1.0),
            seed=seed,
        )
    raise InvalidInput(f"unknown case {case_id!r}; expected one of {', '.join(CASE_IDS)}")


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def propensity(spec: DgpSpec, x: np.ndarray) -> np.ndarray:
    """True ``P(A = 1 | X = x)``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return expit(spec.propensity_intercept + x @ np.asarray(spec.propensity))


def linear_predictor(outcome: OutcomeSpec, x: np.ndarray) -> np.ndarray:
    return outcome.intercept + x @ np.asarray(outcome.coefficients)


@lru_cache(maxsize=8)
def quadrature_rule(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    u, w = hermegauss(nodes)
    return u, w / np.sqrt(2.0 * np.pi)


def latent_mean(linear: np.ndarray, loading: float, nodes: int = QUADRATURE_NODES) -> np.ndarray:
    """``E_U[expit(linear + loading * U)]`` for ``U ~ N(0, 1)`` by Gauss-Hermite quadrature."""
    linear = np.asarray(linear, dtype=float)
    if loading == 0.0:
        return expit(linear)
    u, w = quadrature_rule(nodes)
    flat = linear.ravel()
    out = np.empty_like(flat)
    for start in range(0, flat.size, _CHUNK):
        block = flat[start:start + _CHUNK]
        out[start:start + _CHUNK] = expit(block[:, None] + loading * u) @ w
    return out.reshape(linear.shape)


def conditional_means(spec: DgpSpec, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """True ``(mu0(x), mu1(x))`` with ``U`` integrated out."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    mu0 = latent_mean(linear_predictor(spec.outcome0, x), spec.outcome0.u_loading)
    mu1 = latent_mean(linear_predictor(spec.outcome1, x), spec.outcome1.u_loading)
    return mu0, mu1


def generate(spec: DgpSpec, n: int, seed: SeedLike = None) -> SimulatedSample:
    """
    Draw *n* units from *spec*.

    *seed* may be an int, a ``SeedSequence`` or a ``Generator``; ``None``
    falls back to ``spec.seed``.  Returns the observed :class:`Dataset` and
    the latent truth (both potential outcomes, ``U``, true propensity and
    true conditional means).
    """
    if n < 1:
        raise InvalidInput(f"n must be at least 1, got {n}")
    rng = _rng(spec.seed if seed is None else seed)
    x = rng.standard_normal((n, spec.p))
    u = rng.standard_normal(n)
    e = propensity(spec, x)
    a = (rng.random(n) < e).astype(np.int8)
    p0 = expit(linear_predictor(spec.outcome0, x) + spec.outcome0.u_loading * u)
    p1 = expit(linear_predictor(spec.outcome1, x) + spec.outcome1.u_loading * u)
    y0 = (rng.random(n) < p0).astype(np.int8)
    y1 = (rng.random(n) < p1).astype(np.int8)
    y = np.where(a == 1, y1, y0)

    mu0, mu1 = conditional_means(spec, x)
    data = Dataset(x, a, y)
    latent = LatentTruth(y0=y0, y1=y1, u=u, e=e, mu0=mu0, mu1=mu1)
    logger.debug("generated %s with n=%d (treated %d)", spec.case_id, n, int(a.sum()))
    return SimulatedSample(data=data, latent=latent)


def default_model_spec(spec: DgpSpec) -> ModelSpec:
    """Plain logistic nuisances for the low-dimensional cases, L1-CV otherwise."""
    return ModelSpec.PLAIN if spec.p <= 2 else ModelSpec.L1_CV

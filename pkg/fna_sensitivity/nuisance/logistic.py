"""
Logistic regression solvers
===========================

Two fitters for ``P(label = 1 | x) = expit(b0 + x'b)``:

* :func:`fit_logistic` - unpenalised maximum likelihood by iteratively
  reweighted least squares on the raw features.
* :func:`fit_logistic_l1` - L1-penalised likelihood,
  ``(1/n) * NLL + lambda * ||b||_1`` with an unpenalised intercept, solved by
  proximal Newton steps whose inner weighted lasso is a covariance-update
  coordinate descent.  Features are standardised internally and the
  coefficients are reported on the original scale.

:func:`select_lambda_cv` picks the penalty from a logarithmic grid by K-fold
held-out deviance.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.special import expit, logit

from ..exceptions import InvalidInput, SeparationDetected
from ..models import LogisticModel, Penalty

logger = logging.getLogger(__name__)

# Slope vectors longer than this are treated as diverging.
SEPARATION_NORM = 30.0
# Floor on IRLS weights p(1 - p).
_MIN_WEIGHT = 1e-10
# Largest |label - fitted probability| that still counts as a perfect fit.
_PERFECT_FIT = 1e-6
DEFAULT_CV_FOLDS = 5
DEFAULT_N_LAMBDAS = 30
DEFAULT_LAMBDA_RATIO = 1e-3
DEFAULT_RULE = "1se"


def _as_design(features: np.ndarray, labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(features, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    y = np.asarray(labels, dtype=float).ravel()
    if x.shape[0] != y.shape[0]:
        raise InvalidInput(f"{x.shape[0]} feature rows but {y.shape[0]} labels")
    if y.size == 0:
        raise InvalidInput("cannot fit a logistic model to zero rows")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise InvalidInput("labels must be 0/1")
    return x, y


def _active_columns(x: np.ndarray) -> np.ndarray:
    """Columns with nonzero variance; the others get a zero coefficient."""
    return np.ptp(x, axis=0) > 0.0


def _check_labels(y: np.ndarray) -> float:
    ybar = float(y.mean())
    if ybar in (0.0, 1.0):
        raise SeparationDetected(
            f"all {y.size} labels equal {int(ybar)}; the intercept diverges"
        )
    return ybar


def _neg_loglik(eta: np.ndarray, y: np.ndarray) -> float:
    # log(1 + e^eta) - y * eta, computed stably
    return float(np.sum(np.logaddexp(0.0, eta) - y * eta))


# ---------------------------------------------------------------------------
# Unpenalised IRLS
# ---------------------------------------------------------------------------


def _solve(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return linalg.solve(lhs, rhs, assume_a="pos")
    except (linalg.LinAlgError, ValueError):
        logger.debug("normal equations singular; falling back to least squares")
        return linalg.lstsq(lhs, rhs)[0]


def fit_logistic(
    features: np.ndarray,
    labels: np.ndarray,
    max_iter: int = 100,
    tol: float = 1e-8,
) -> LogisticModel:
    """
    Maximum-likelihood logistic regression by IRLS.

    Converges when the largest coefficient change drops below *tol*.
    Zero-variance columns are left out of the design and reported with a
    zero coefficient.

    Raises
    ------
    SeparationDetected
        When the labels are constant, the fitted probabilities reproduce
        every label, or the slope vector grows past ``SEPARATION_NORM`` (the
        maximum-likelihood estimate does not exist).
    """
    x, y = _as_design(features, labels)
    ybar = _check_labels(y)
    active = _active_columns(x)
    z = np.column_stack([np.ones(len(y)), x[:, active]])

    beta = np.zeros(z.shape[1])
    beta[0] = logit(ybar)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        eta = z @ beta
        p = expit(eta)
        if np.max(np.abs(y - p)) < _PERFECT_FIT:
            raise SeparationDetected(
                f"fitted probabilities reproduce every label at IRLS iteration {it}; "
                "the data are separable"
            )
        w = np.maximum(p * (1.0 - p), _MIN_WEIGHT)
        working = eta + (y - p) / w
        zw = z * w[:, None]
        new = _solve(zw.T @ z, zw.T @ working)
        if not np.all(np.isfinite(new)) or np.linalg.norm(new[1:]) > SEPARATION_NORM:
            raise SeparationDetected(
                f"coefficient norm exceeded {SEPARATION_NORM} at IRLS iteration {it}; "
                "the data look separable"
            )
        step = float(np.max(np.abs(new - beta)))
        beta = new
        logger.debug("IRLS iteration %d: max step %.3g", it, step)
        if step < tol:
            converged = True
            break
    if not converged:
        logger.warning("IRLS stopped after %d iterations without converging", max_iter)

    coef = np.zeros(x.shape[1])
    coef[active] = beta[1:]
    return LogisticModel(
        intercept=float(beta[0]),
        coefficients=coef,
        penalty=Penalty.NONE,
        n_iter=it,
        converged=converged,
    )


# ---------------------------------------------------------------------------
# L1-penalised fit
# ---------------------------------------------------------------------------


@dataclass
class _Standardized:
    """Standardised active columns plus the transform needed to undo it."""

    x: np.ndarray
    mean: np.ndarray
    scale: np.ndarray
    active: np.ndarray

    @classmethod
    def of(cls, x: np.ndarray) -> _Standardized:
        active = _active_columns(x)
        xa = x[:, active]
        mean = xa.mean(axis=0)
        scale = xa.std(axis=0)
        return cls((xa - mean) / scale, mean, scale, active)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (x[:, self.active] - self.mean) / self.scale

    def to_model(
        self,
        b0: float,
        beta: np.ndarray,
        p: int,
        lam: float,
        n_iter: int,
        converged: bool,
    ) -> LogisticModel:
        coef = np.zeros(p)
        coef[self.active] = beta / self.scale
        intercept = b0 - float(np.sum(beta * self.mean / self.scale))
        return LogisticModel(
            intercept=intercept,
            coefficients=coef,
            penalty=Penalty.L1,
            lambda_=lam,
            n_iter=n_iter,
            converged=converged,
        )


def _soft_threshold(value: float, lam: float) -> float:
    if value > lam:
        return value - lam
    if value < -lam:
        return value + lam
    return 0.0


def _penalized_objective(x: np.ndarray, y: np.ndarray, b0: float, beta: np.ndarray, lam: float) -> float:
    return _neg_loglik(b0 + x @ beta, y) / len(y) + lam * float(np.abs(beta).sum())


def _weighted_lasso(
    gram: np.ndarray,
    cross: np.ndarray,
    lam: float,
    beta: np.ndarray,
    max_sweeps: int,
    tol: float,
) -> np.ndarray:
    """Coordinate descent for ``0.5 b'Gb - c'b + lam ||b||_1``."""
    beta = beta.copy()
    diag = np.diag(gram)
    for _ in range(max_sweeps):
        biggest = 0.0
        for j in range(len(beta)):
            if diag[j] <= 0.0:
                continue
            old = beta[j]
            partial = cross[j] - gram[j] @ beta + diag[j] * old
            beta[j] = _soft_threshold(partial, lam) / diag[j]
            biggest = max(biggest, abs(beta[j] - old))
        if biggest < tol:
            break
    return beta


def _fit_l1_standardized(
    xs: np.ndarray,
    y: np.ndarray,
    lam: float,
    b0: float,
    beta: np.ndarray,
    max_iter: int,
    tol: float,
) -> Tuple[float, np.ndarray, int, bool]:
    n = len(y)
    objective = _penalized_objective(xs, y, b0, beta, lam)
    for it in range(1, max_iter + 1):
        eta = b0 + xs @ beta
        p = expit(eta)
        w = np.maximum(p * (1.0 - p), _MIN_WEIGHT)
        working = eta + (y - p) / w

        # Weighted centring profiles out the unpenalised intercept.
        wsum = w.sum()
        x_bar = (w @ xs) / wsum
        z_bar = float(w @ working) / wsum
        xc = xs - x_bar
        zc = working - z_bar
        xw = xc * w[:, None]
        gram = xw.T @ xc / n
        cross = xw.T @ zc / n

        new_beta = _weighted_lasso(gram, cross, lam, beta, max_sweeps=1000, tol=tol * 0.1)
        new_b0 = z_bar - float(x_bar @ new_beta)

        # Halve the proximal Newton step until the objective does not increase.
        new_obj = _penalized_objective(xs, y, new_b0, new_beta, lam)
        halvings = 0
        while new_obj > objective + 1e-12 and halvings < 30:
            new_beta = 0.5 * (new_beta + beta)
            new_b0 = 0.5 * (new_b0 + b0)
            new_obj = _penalized_objective(xs, y, new_b0, new_beta, lam)
            halvings += 1

        step = max(abs(new_b0 - b0), float(np.max(np.abs(new_beta - beta), initial=0.0)))
        b0, beta, objective = new_b0, new_beta, new_obj
        logger.debug("L1 iteration %d (lambda=%.3g): objective %.10g, step %.3g",
                     it, lam, objective, step)
        if step < tol:
            return b0, beta, it, True
    return b0, beta, max_iter, False


def fit_logistic_l1(
    features: np.ndarray,
    labels: np.ndarray,
    lambda_: float,
    max_iter: int = 100,
    tol: float = 1e-8,
) -> LogisticModel:
    """
    L1-penalised logistic regression.

    Minimises ``(1/n) * NLL + lambda_ * ||b||_1`` on standardised features
    (zero mean, unit variance); the intercept is not penalised.  With a very
    large ``lambda_`` every slope is zero and the intercept is
    ``logit(mean(labels))``.
    """
    if not lambda_ >= 0.0:
        raise InvalidInput(f"lambda must be nonnegative, got {lambda_!r}")
    x, y = _as_design(features, labels)
    ybar = _check_labels(y)
    std = _Standardized.of(x)
    b0, beta, it, converged = _fit_l1_standardized(
        std.x, y, lambda_, logit(ybar), np.zeros(std.x.shape[1]), max_iter, tol
    )
    if not converged:
        logger.warning("L1 fit (lambda=%.3g) stopped after %d iterations", lambda_, max_iter)
    return std.to_model(b0, beta, x.shape[1], lambda_, it, converged)


def lambda_max(features: np.ndarray, labels: np.ndarray) -> float:
    """Smallest penalty at which every standardised slope is zero."""
    x, y = _as_design(features, labels)
    std = _Standardized.of(x)
    if std.x.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(std.x.T @ (y - y.mean()))) / len(y))


def lambda_grid(
    features: np.ndarray,
    labels: np.ndarray,
    n_lambdas: int = DEFAULT_N_LAMBDAS,
    ratio: float = DEFAULT_LAMBDA_RATIO,
) -> np.ndarray:
    """Descending logarithmic grid from ``lambda_max`` down to ``ratio * lambda_max``."""
    top = lambda_max(features, labels)
    if top <= 0.0:
        return np.zeros(1)
    return np.geomspace(top, top * ratio, n_lambdas)


def _stratified_folds(y: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    folds = np.empty(len(y), dtype=int)
    for label in (0.0, 1.0):
        idx = np.flatnonzero(y == label)
        folds[idx[rng.permutation(len(idx))]] = np.arange(len(idx)) % k
    return folds


def _deviance(p: np.ndarray, y: np.ndarray) -> float:
    p = np.clip(p, 1e-15, 1.0 - 1e-15)
    return float(-2.0 * np.mean(y * np.log(p) + (1.0 - y) * np.log1p(-p)))


def select_lambda_cv(
    features: np.ndarray,
    labels: np.ndarray,
    folds: int = DEFAULT_CV_FOLDS,
    seed: Optional[int] = 0,
    n_lambdas: int = DEFAULT_N_LAMBDAS,
    rule: str = DEFAULT_RULE,
) -> float:
    """
    Choose the L1 penalty by K-fold cross-validated deviance.

    Folds are stratified by label and drawn from ``default_rng(seed)``, so a
    fixed seed gives a fixed choice.  ``rule="1se"`` (the default) returns the
    largest value within one standard error of the lowest mean held-out
    deviance, so labels unrelated to the features select ``lambda_max``;
    ``rule="min"`` returns the grid value with the lowest deviance itself.
    """
    if folds < 2:
        raise InvalidInput(f"folds must be at least 2, got {folds}")
    if rule not in ("min", "1se"):
        raise InvalidInput(f"rule must be 'min' or '1se', got {rule!r}")
    x, y = _as_design(features, labels)
    _check_labels(y)
    grid = lambda_grid(x, y, n_lambdas)
    if len(grid) == 1:
        return float(grid[0])

    assignment = _stratified_folds(y, folds, np.random.default_rng(seed))
    deviances = np.full((folds, len(grid)), np.nan)
    for k in range(folds):
        train, test = assignment != k, assignment == k
        y_train = y[train]
        if y_train.min() == y_train.max() or not test.any():
            logger.warning("CV fold %d has a constant training label; skipped", k)
            continue
        std = _Standardized.of(x[train])
        xt = std.apply(x[test])
        b0, beta = float(logit(y_train.mean())), np.zeros(std.x.shape[1])
        for j, lam in enumerate(grid):
            b0, beta, _, _ = _fit_l1_standardized(std.x, y_train, lam, b0, beta, 100, 1e-6)
            deviances[k, j] = _deviance(expit(b0 + xt @ beta), y[test])

    used = ~np.isnan(deviances[:, 0])
    if not used.any():
        raise InvalidInput("no cross-validation fold had both label values in training")
    mean = deviances[used].mean(axis=0)
    best = int(np.argmin(mean))
    if rule == "1se" and used.sum() > 1:
        se = deviances[used].std(axis=0, ddof=1) / np.sqrt(used.sum())
        best = int(np.flatnonzero(mean <= mean[best] + se[best])[0])
    logger.info("selected lambda %.4g (%s rule, index %d of %d)", grid[best], rule, best, len(grid))
    return float(grid[best])


def fit_logistic_l1_cv(
    features: np.ndarray,
    labels: np.ndarray,
    folds: int = DEFAULT_CV_FOLDS,
    seed: Optional[int] = 0,
) -> LogisticModel:
    """L1 fit at the penalty minimising cross-validated deviance."""
    lam = select_lambda_cv(features, labels, folds=folds, seed=seed, rule="min")
    return fit_logistic_l1(features, labels, lam)

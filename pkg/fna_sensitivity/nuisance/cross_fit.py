"""
Cross-fitted nuisance predictions
=================================

Splits the sample into K folds and, for each fold, trains the propensity
model ``e(x) = P(A = 1 | x)`` and the arm-specific outcome models
``mu_a(x) = P(Y = 1 | x, A = a)`` on the other folds only, then predicts on
the held-out fold.  Every stored prediction is therefore out-of-fold.
"""
from __future__ import annotations

import logging
from typing import Any, Dict, List, Optional

import numpy as np

from ..exceptions import FoldDegenerate, InvalidInput, SeparationDetected
from ..models import Dataset, LogisticModel, ModelSpec, NuisanceFit
from .logistic import DEFAULT_CV_FOLDS, fit_logistic, fit_logistic_l1_cv

logger = logging.getLogger(__name__)

DEFAULT_FOLDS = 2
EPS_E = 0.01
EPS_MU = 0.001


def assign_folds(n: int, folds: int, rng: np.random.Generator) -> np.ndarray:
    """Seeded uniform shuffle into *folds* groups whose sizes differ by at most one."""
    assignment = np.empty(n, dtype=int)
    assignment[rng.permutation(n)] = np.arange(n) % folds
    return assignment


def _check_assignment(assignment: np.ndarray, n: int) -> np.ndarray:
    folds = np.asarray(assignment)
    if folds.shape != (n,):
        raise InvalidInput(f"fold_assignment must have length {n}, got shape {folds.shape}")
    if not np.issubdtype(folds.dtype, np.integer):
        if not np.all(np.equal(np.mod(folds, 1), 0)):
            raise InvalidInput("fold ids must be integers")
        folds = folds.astype(int)
    ids = np.unique(folds)
    if len(ids) < 2 or ids[0] != 0 or ids[-1] != len(ids) - 1:
        raise InvalidInput(f"fold ids must be 0..K-1 with K >= 2, got {ids.tolist()}")
    return folds


def _fit(
    spec: ModelSpec,
    x: np.ndarray,
    labels: np.ndarray,
    seed: int,
    cv_folds: int,
    notes: List[str],
    what: str,
) -> LogisticModel:
    if spec is ModelSpec.L1_CV:
        return fit_logistic_l1_cv(x, labels, folds=cv_folds, seed=seed)
    try:
        return fit_logistic(x, labels)
    except SeparationDetected as exc:
        logger.warning("%s: %s; falling back to L1 with CV penalty", what, exc)
        notes.append(what)
        return fit_logistic_l1_cv(x, labels, folds=cv_folds, seed=seed)


def cross_fit(
    data: Dataset,
    folds: int = DEFAULT_FOLDS,
    model_spec: ModelSpec | str = ModelSpec.PLAIN,
    seed: Optional[int] = None,
    eps_e: float = EPS_E,
    eps_mu: float = EPS_MU,
    fold_assignment: Optional[np.ndarray] = None,
    cv_folds: int = DEFAULT_CV_FOLDS,
) -> NuisanceFit:
    """
    Out-of-fold predictions of ``(e, mu0, mu1)`` for every unit.

    Parameters
    ----------
    data:
        The observed sample.
    folds:
        Number of folds K (ignored when *fold_assignment* is given).
    model_spec:
        ``plain`` (IRLS, falling back to L1-CV on separation) or ``l1_cv``.
    seed:
        Seed for the fold shuffle and the penalty cross-validation.
    eps_e, eps_mu:
        Predictions are clipped to ``[eps_e, 1 - eps_e]`` and
        ``[eps_mu, 1 - eps_mu]``.
    fold_assignment:
        Explicit fold ids ``0..K-1``; overrides the seeded shuffle.

    Raises
    ------
    FoldDegenerate
        When a training complement lacks a treatment arm, or an arm's
        outcomes are constant in it.
    """
    spec = ModelSpec(model_spec)
    if not (0.0 < eps_e < 0.5 and 0.0 < eps_mu < 0.5):
        raise InvalidInput(f"clip bounds must lie in (0, 0.5), got eps_e={eps_e}, eps_mu={eps_mu}")
    rng = np.random.default_rng(seed)
    if fold_assignment is None:
        if folds < 2:
            raise InvalidInput(f"folds must be at least 2, got {folds}")
        if folds > data.n:
            raise FoldDegenerate(f"{folds} folds requested for {data.n} units")
        assignment = assign_folds(data.n, folds, rng)
    else:
        assignment = _check_assignment(fold_assignment, data.n)
    k_total = int(assignment.max()) + 1
    cv_seed = int(rng.integers(2**32))

    x, a, y = data.covariates, data.treatment, data.outcome
    e_hat = np.empty(data.n)
    mu0_hat = np.empty(data.n)
    mu1_hat = np.empty(data.n)
    fallbacks: List[str] = []
    models: List[Dict[str, Any]] = []

    for k in range(k_total):
        test = assignment == k
        train = ~test
        a_train, y_train = a[train], y[train]
        if a_train.min() == a_train.max():
            raise FoldDegenerate(
                f"training complement of fold {k} has only treatment arm {int(a_train[0])}; "
                "use fewer folds"
            )
        for arm in (0, 1):
            y_arm = y_train[a_train == arm]
            if y_arm.min() == y_arm.max():
                raise FoldDegenerate(
                    f"training complement of fold {k} has constant outcome {int(y_arm[0])} "
                    f"in arm {arm}; use fewer folds"
                )
        logger.info("fold %d: %d training units, %d held out", k, int(train.sum()), int(test.sum()))

        x_train = x[train]
        e_model = _fit(spec, x_train, a_train, cv_seed + k, cv_folds, fallbacks, f"fold {k} propensity")
        m0 = _fit(spec, x_train[a_train == 0], y_train[a_train == 0], cv_seed + k,
                  cv_folds, fallbacks, f"fold {k} outcome arm 0")
        m1 = _fit(spec, x_train[a_train == 1], y_train[a_train == 1], cv_seed + k,
                  cv_folds, fallbacks, f"fold {k} outcome arm 1")

        x_test = x[test]
        e_hat[test] = e_model.predict_proba(x_test)
        mu0_hat[test] = m0.predict_proba(x_test)
        mu1_hat[test] = m1.predict_proba(x_test)
        models.append({"fold": k, "propensity": e_model.to_dict(),
                       "outcome0": m0.to_dict(), "outcome1": m1.to_dict()})

    return NuisanceFit(
        e_hat=np.clip(e_hat, eps_e, 1.0 - eps_e),
        mu0_hat=np.clip(mu0_hat, eps_mu, 1.0 - eps_mu),
        mu1_hat=np.clip(mu1_hat, eps_mu, 1.0 - eps_mu),
        fold_assignment=assignment,
        eps_e=eps_e,
        eps_mu=eps_mu,
        model_spec=spec,
        metadata={"folds": k_total, "seed": seed, "fallbacks": fallbacks, "models": models},
    )

"""
Tests for the logistic solvers and cross-fitting in fna_sensitivity.nuisance.
"""
from __future__ import annotations

import numpy as np
import pytest
from scipy.special import expit, logit

from fna_sensitivity.exceptions import FoldDegenerate, InvalidInput, SeparationDetected
from fna_sensitivity.models import Dataset, ModelSpec, Penalty
from fna_sensitivity.nuisance.cross_fit import EPS_E, EPS_MU, assign_folds, cross_fit
from fna_sensitivity.nuisance.logistic import (
    fit_logistic,
    fit_logistic_l1,
    fit_logistic_l1_cv,
    lambda_grid,
    lambda_max,
    select_lambda_cv,
)
from fna_sensitivity.simulation.dgp import case_spec, generate


def _logistic_data(n: int, slopes, intercept: float = 0.0, seed: int = 0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, len(slopes)))
    y = (rng.random(n) < expit(intercept + x @ np.asarray(slopes))).astype(float)
    return x, y


@pytest.fixture
def observational():
    """Confounded sample with both arms and mixed outcomes everywhere."""
    rng = np.random.default_rng(7)
    n = 400
    x = rng.standard_normal((n, 2))
    a = (rng.random(n) < expit(0.5 * x[:, 0])).astype(int)
    y = (rng.random(n) < expit(0.3 + 0.8 * x[:, 1] + 0.5 * a)).astype(int)
    return Dataset(x, a, y)


# ─────────────────────────────────────────────────────────────────────────────
# Unpenalised IRLS
# ─────────────────────────────────────────────────────────────────────────────


class TestFitLogistic:
    def test_zero_variance_feature(self):
        x = np.ones((10, 1))
        y = np.array([0, 1] * 5, dtype=float)
        model = fit_logistic(x, y)
        assert model.intercept == pytest.approx(logit(0.5), abs=1e-10)
        assert model.coefficients[0] == 0.0

    def test_slope_consistency(self):
        x, y = _logistic_data(100_000, [1.0], seed=1)
        model = fit_logistic(x, y)
        assert model.coefficients[0] == pytest.approx(1.0, abs=0.03)
        assert model.intercept == pytest.approx(0.0, abs=0.03)
        assert model.converged

    def test_gradient_vanishes_at_optimum(self):
        x, y = _logistic_data(500, [0.7, -0.4, 0.2], intercept=0.3, seed=2)
        model = fit_logistic(x, y)
        residual = y - model.predict_proba(x)
        z = np.column_stack([np.ones(len(y)), x])
        assert np.max(np.abs(z.T @ residual)) < 1e-6

    def test_separable_data(self):
        x = np.array([[-2.0], [-1.0], [1.0], [2.0]])
        y = np.array([0.0, 0.0, 1.0, 1.0])
        with pytest.raises(SeparationDetected):
            fit_logistic(x, y)

    def test_constant_labels(self):
        with pytest.raises(SeparationDetected):
            fit_logistic(np.arange(5.0).reshape(-1, 1), np.zeros(5))

    def test_non_binary_labels_rejected(self):
        with pytest.raises(InvalidInput):
            fit_logistic(np.arange(4.0).reshape(-1, 1), np.array([0, 1, 2, 1]))

    def test_predictions_strictly_inside(self):
        x, y = _logistic_data(200, [1.5], seed=3)
        p = fit_logistic(x, y).predict_proba(np.array([[-1e6], [1e6]]))
        assert np.all((p > 0.0) & (p < 1.0))


# ─────────────────────────────────────────────────────────────────────────────
# L1-penalised fit and penalty selection
# ─────────────────────────────────────────────────────────────────────────────


class TestFitLogisticL1:
    def test_large_lambda_shrinks_everything(self):
        x, y = _logistic_data(300, [1.0, -1.0, 0.5], seed=4)
        model = fit_logistic_l1(x, y, lambda_=10.0)
        assert np.all(model.coefficients == 0.0)
        assert model.intercept == pytest.approx(logit(y.mean()), abs=1e-10)
        assert model.penalty is Penalty.L1

    def test_at_lambda_max_slopes_are_zero(self):
        x, y = _logistic_data(300, [0.4, 0.2], seed=5)
        model = fit_logistic_l1(x, y, lambda_=lambda_max(x, y) * (1 + 1e-9))
        assert np.allclose(model.coefficients, 0.0)

    def test_zero_lambda_agrees_with_irls(self):
        x, y = _logistic_data(2000, [0.8, -0.5, 0.3], intercept=-0.2, seed=6)
        plain = fit_logistic(x, y)
        lasso = fit_logistic_l1(x, y, lambda_=0.0)
        assert lasso.intercept == pytest.approx(plain.intercept, abs=1e-4)
        np.testing.assert_allclose(lasso.coefficients, plain.coefficients, atol=1e-4)

    def test_negative_lambda_rejected(self):
        x, y = _logistic_data(50, [1.0], seed=7)
        with pytest.raises(InvalidInput):
            fit_logistic_l1(x, y, lambda_=-0.1)

    def test_sparse_design_picks_leading_feature(self):
        sample = generate(case_spec("C4"), 2000, seed=8)
        data = sample.data
        control = data.treatment == 0
        model = fit_logistic_l1_cv(data.covariates[control], data.outcome[control], seed=8)
        assert int(np.argmax(np.abs(model.coefficients))) == 0


class TestSelectLambda:
    def test_grid_is_descending_from_lambda_max(self):
        x, y = _logistic_data(200, [1.0, 0.0], seed=9)
        grid = lambda_grid(x, y)
        assert grid[0] == pytest.approx(lambda_max(x, y))
        assert np.all(np.diff(grid) < 0.0)
        assert grid[-1] == pytest.approx(grid[0] * 1e-3)

    def test_deterministic_for_seed(self):
        x, y = _logistic_data(300, [0.6, -0.3, 0.0], seed=10)
        assert select_lambda_cv(x, y, seed=3) == select_lambda_cv(x, y, seed=3)

    def test_pure_noise_selects_max_penalty(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal((400, 5))
        y = (rng.random(400) < 0.4).astype(float)
        lam = select_lambda_cv(x, y, seed=0)
        assert lam == pytest.approx(lambda_max(x, y))

    def test_strong_signal_selects_small_penalty(self):
        x, y = _logistic_data(500, [3.0], seed=12)
        grid = lambda_grid(x, y)
        assert select_lambda_cv(x, y, seed=0, rule="min") < np.median(grid)
        assert select_lambda_cv(x, y, seed=0) < grid[0]

    def test_unknown_rule_rejected(self):
        x, y = _logistic_data(100, [1.0], seed=13)
        with pytest.raises(InvalidInput):
            select_lambda_cv(x, y, rule="max")


# ─────────────────────────────────────────────────────────────────────────────
# Cross-fitting
# ─────────────────────────────────────────────────────────────────────────────


class TestAssignFolds:
    def test_balanced_sizes(self):
        folds = assign_folds(11, 3, np.random.default_rng(0))
        counts = np.bincount(folds)
        assert counts.max() - counts.min() <= 1
        assert set(folds.tolist()) == {0, 1, 2}


class TestCrossFit:
    def test_deterministic_for_seed(self, observational):
        a = cross_fit(observational, seed=5)
        b = cross_fit(observational, seed=5)
        for name in ("e_hat", "mu0_hat", "mu1_hat", "fold_assignment"):
            assert np.array_equal(getattr(a, name), getattr(b, name))

    def test_predictions_within_clip_bounds(self, observational):
        fit = cross_fit(observational, seed=1)
        assert fit.e_hat.min() >= EPS_E and fit.e_hat.max() <= 1 - EPS_E
        for arr in (fit.mu0_hat, fit.mu1_hat):
            assert arr.min() >= EPS_MU and arr.max() <= 1 - EPS_MU

    def test_extreme_propensity_is_clipped(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((600, 1))
        a = (rng.random(600) < expit(4.0 * x[:, 0])).astype(int)
        y = (rng.random(600) < 0.5).astype(int)
        fit = cross_fit(Dataset(x, a, y), seed=2)
        assert fit.e_hat.min() == pytest.approx(EPS_E)
        assert fit.e_hat.max() == pytest.approx(1 - EPS_E)

    def test_matches_manual_per_fold_fit(self, observational):
        folds = np.arange(observational.n) % 2
        fit = cross_fit(observational, fold_assignment=folds, seed=0)
        x, a, y = observational.covariates, observational.treatment, observational.outcome
        for k in (0, 1):
            train, test = folds != k, folds == k
            e_model = fit_logistic(x[train], a[train])
            arm0 = train & (a == 0)
            m0 = fit_logistic(x[arm0], y[arm0])
            np.testing.assert_allclose(
                fit.e_hat[test], np.clip(e_model.predict_proba(x[test]), EPS_E, 1 - EPS_E), rtol=1e-12
            )
            np.testing.assert_allclose(
                fit.mu0_hat[test], np.clip(m0.predict_proba(x[test]), EPS_MU, 1 - EPS_MU), rtol=1e-12
            )

    def test_row_order_within_fold_irrelevant(self, observational):
        folds = np.arange(observational.n) % 2
        fit = cross_fit(observational, fold_assignment=folds, seed=0)
        order = np.concatenate([np.flatnonzero(folds == 0)[::-1], np.flatnonzero(folds == 1)])
        permuted = cross_fit(observational.subset(order), fold_assignment=folds[order], seed=0)
        np.testing.assert_allclose(permuted.mu1_hat, fit.mu1_hat[order], rtol=1e-9)
        np.testing.assert_allclose(permuted.e_hat, fit.e_hat[order], rtol=1e-9)

    def test_constant_propensity_recovered(self):
        rng = np.random.default_rng(4)
        n = 20_000
        x = rng.standard_normal((n, 2))
        a = (rng.random(n) < 0.5).astype(int)
        y = (rng.random(n) < expit(x[:, 0])).astype(int)
        fit = cross_fit(Dataset(x, a, y), seed=4)
        assert fit.e_hat.mean() == pytest.approx(0.5, abs=0.01)

    def test_constant_outcome_in_arm(self):
        n = 20
        x = np.linspace(-1, 1, n).reshape(-1, 1)
        a = np.arange(n) % 2
        y = a.copy()
        with pytest.raises(FoldDegenerate):
            cross_fit(Dataset(x, a, y), seed=0)

    def test_too_many_folds(self, observational):
        with pytest.raises(FoldDegenerate):
            cross_fit(observational, folds=observational.n + 1)

    def test_bad_fold_ids_rejected(self, observational):
        with pytest.raises(InvalidInput):
            cross_fit(observational, fold_assignment=np.full(observational.n, 3))

    def test_l1_spec_records_metadata(self, observational):
        fit = cross_fit(observational, model_spec="l1_cv", seed=3)
        assert fit.model_spec is ModelSpec.L1_CV
        assert fit.metadata["folds"] == 2
        assert all(m["propensity"]["penalty"] == "l1" for m in fit.metadata["models"])

    def test_separation_falls_back_to_l1(self):
        rng = np.random.default_rng(6)
        n = 200
        x = rng.standard_normal((n, 1))
        a = (rng.random(n) < 0.5).astype(int)
        # Treated outcomes are perfectly separated by the sign of x.
        y = np.where(a == 1, (x[:, 0] > 0).astype(int), (rng.random(n) < 0.4).astype(int))
        fit = cross_fit(Dataset(x, a, y), seed=6)
        assert any("arm 1" in what for what in fit.metadata["fallbacks"])

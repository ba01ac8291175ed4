"""
FnaAnalysis
===========

High-level facade over the package: load a dataset, cross-fit the nuisance
models once, then answer bound, range, estimate, curve and ATE queries from
the same fit.  Also runs the built-in simulation designs.

The CLI is a thin layer over this class.
"""
from __future__ import annotations

import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..bounds.pointwise import (
    fh_bounds,
    general_bounds,
    lower_bound_decomposed,
    rho_feasible_range,
    rho_star_threshold,
    upper_bound_caps,
)
from ..estimators.beta import (
    DEFAULT_LEVEL,
    dr_ate,
    estimate_beta,
    fh_population_bounds,
    policy_bounds,
    sensitivity_curve,
)
from ..estimators.rho_range import DEFAULT_QUANTILE, rho_upper_selection
from ..exceptions import DegenerateMarginal, NotApplicable
from ..io.csv_io import load_csv
from ..models import (
    CurveReport,
    Dataset,
    EstimateReport,
    MarginalPair,
    MetricsRow,
    ModelSpec,
    NuisanceFit,
    RhoInterval,
    RhoRangeSelection,
)
from ..nuisance.cross_fit import DEFAULT_FOLDS, cross_fit
from ..simulation.dgp import case_spec
from ..simulation.study import run_study

logger = logging.getLogger(__name__)


class FnaAnalysis:
    """
    Analysis session over one dataset.

    Parameters
    ----------
    folds:
        Cross-fitting folds (default 2).
    model_spec:
        Nuisance learner, ``plain`` or ``l1_cv``.
    seed:
        Seed for the fold shuffle and penalty selection.
    level:
        Confidence level for every interval.
    """

    def __init__(
        self,
        folds: int = DEFAULT_FOLDS,
        model_spec: ModelSpec | str = ModelSpec.PLAIN,
        seed: Optional[int] = None,
        level: float = DEFAULT_LEVEL,
    ) -> None:
        self.folds = folds
        self.model_spec = ModelSpec(model_spec)
        self.seed = seed
        self.level = level
        self.data: Optional[Dataset] = None
        self._fit: Optional[NuisanceFit] = None
        #: Warnings collected from every query, in order.
        self.warnings: List[str] = []

    # ------------------------------------------------------------------
    # Data and nuisance fit
    # ------------------------------------------------------------------

    def load(self, path: str, covariates: Optional[Sequence[str]] = None) -> Dataset:
        self.use(load_csv(path, covariates))
        return self.data  # type: ignore[return-value]

    def use(self, data: Dataset) -> None:
        """Analyse *data*; drops any previous fit."""
        self.data = data
        self._fit = None

    @property
    def fit(self) -> NuisanceFit:
        """Cross-fitted nuisances for the loaded data, computed on first use."""
        if self.data is None:
            raise RuntimeError("no dataset loaded; call load() or use() first")
        if self._fit is None:
            self._fit = cross_fit(self.data, folds=self.folds,
                                  model_spec=self.model_spec, seed=self.seed)
            for what in self._fit.metadata.get("fallbacks", []):
                self.warnings.append(f"{what}: separation detected, refitted with L1 penalty")
        return self._fit

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    @staticmethod
    def pointwise_bounds(
        mu0: float,
        mu1: float,
        rho_l: Optional[float] = None,
        rho_u: Optional[float] = None,
    ) -> Dict[str, Any]:
        """Every closed-form quantity at one covariate point."""
        m = MarginalPair(mu0, mu1)
        out: Dict[str, Any] = {"marginals": m.to_dict(), "fh": fh_bounds(m).to_dict(),
                               "caps": upper_bound_caps(m).to_dict()}
        try:
            feasible = rho_feasible_range(m)
        except DegenerateMarginal:
            out["rho_feasible"] = None
            return out
        out["rho_feasible"] = feasible.to_dict()
        out["independent_fna"] = m.independent_fna
        try:
            out["rho_star"] = rho_star_threshold(m)
        except NotApplicable:
            out["rho_star"] = None
        if rho_l is not None or rho_u is not None:
            ri = RhoInterval(feasible.rho_l if rho_l is None else rho_l,
                             feasible.rho_u if rho_u is None else rho_u)
            out["rho_interval"] = ri.to_dict()
            out["bounds"] = general_bounds(m, ri).to_dict()
            if 0.0 <= ri.rho_u <= feasible.rho_u:
                out["lower_decomposition"] = lower_bound_decomposed(m, ri.rho_u).to_dict()
        return out

    def population_bounds(
        self,
        rho_l: Optional[float] = None,
        rho_u: Optional[float] = None,
    ) -> Dict[str, Any]:
        """
        Plug-in Frechet-Hoeffding bounds plus the DR-ATE for the loaded data.

        When either end of a correlation range is given, the estimated bounds
        on FNA over ``[rho_l, rho_u]`` are added under ``"bounds"``.  A
        missing ``rho_l`` is 0 and a missing ``rho_u`` is the data-driven
        choice of :meth:`rho_range`.
        """
        out: Dict[str, Any] = {
            "fh": fh_population_bounds(self.fit).to_dict(),
            "ate": self.ate().to_dict(),
            "n": self.fit.n,
        }
        if rho_l is None and rho_u is None:
            return out
        if rho_u is None:
            rho_u = self.rho_range().rho_u
        ri = RhoInterval(0.0 if rho_l is None else rho_l, rho_u)
        bounds = policy_bounds(self.data, self.fit, np.ones(self.fit.n, dtype=int),  # type: ignore[arg-type]
                               ri, self.level)
        self.warnings.extend(bounds.lower.warnings + bounds.upper.warnings)
        out["rho_interval"] = ri.to_dict()
        out["bounds"] = bounds.to_dict()
        return out

    def rho_range(
        self,
        quantile: float = DEFAULT_QUANTILE,
        step: Optional[float] = None,
        rho_u: Optional[float] = None,
    ) -> RhoRangeSelection:
        return rho_upper_selection(self.fit, quantile=quantile, step=step, rho_u=rho_u)

    def estimate(self, rho: float) -> EstimateReport:
        report = estimate_beta(self.data, self.fit, rho, self.level)  # type: ignore[arg-type]
        self.warnings.extend(report.warnings)
        return report

    def curve(self, rho_grid: Sequence[float]) -> CurveReport:
        report = sensitivity_curve(self.data, self.fit, rho_grid, self.level)  # type: ignore[arg-type]
        self.warnings.extend(report.warnings)
        return report

    def curve_frame(self, rho_grid: Sequence[float]) -> pd.DataFrame:
        """Curve table with the plug-in Frechet-Hoeffding bounds as extra columns."""
        frame = self.curve(rho_grid).to_frame()
        fh = fh_population_bounds(self.fit)
        frame["fh_lower"] = fh.lower
        frame["fh_upper"] = fh.upper
        return frame

    def ate(self) -> EstimateReport:
        return dr_ate(self.data, self.fit, self.level)  # type: ignore[arg-type]

    # ------------------------------------------------------------------
    # Simulation
    # ------------------------------------------------------------------

    def simulate(
        self,
        cases: Sequence[str],
        n: int,
        rho_list: Sequence[float],
        replications: int,
        n_jobs: int = 1,
        integrator: str = "monte_carlo",
        model_spec: Optional[ModelSpec | str] = None,
    ) -> List[MetricsRow]:
        """Run the replication study for each named case; rows in case order."""
        rows: List[MetricsRow] = []
        for case in cases:
            spec = case_spec(case)
            rows.extend(run_study(
                spec,
                n=n,
                rho_list=rho_list,
                replications=replications,
                folds=self.folds,
                model_spec=model_spec,
                master_seed=self.seed,
                level=self.level,
                n_jobs=n_jobs,
                integrator=integrator,
            ))
        return rows

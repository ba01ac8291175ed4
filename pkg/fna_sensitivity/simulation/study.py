"""
Replication studies
===================

Repeats generate -> cross-fit -> estimate for a design and summarises the
estimates of ``beta_rho`` against the truth as Bias / SD / ESE / CP95.

Each replication owns a ``SeedSequence`` child of the master seed, so results
do not depend on how joblib schedules the work.
"""
from __future__ import annotations

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..estimators.beta import DEFAULT_LEVEL, fh_population_bounds, sensitivity_curve
from ..exceptions import FoldDegenerate, InvalidInput
from ..models import DgpSpec, MetricsRow, ModelSpec
from ..nuisance.cross_fit import DEFAULT_FOLDS, cross_fit
from .dgp import default_model_spec, generate
from .truth import DEFAULT_INNER, DEFAULT_OUTER, true_beta

logger = logging.getLogger(__name__)

DESK_REPLICATIONS = 500
DESK_N = 1000

METRICS_COLUMNS = ["case_id", "n", "rho", "beta_true", "bias", "sd", "ese", "cp95", "replications"]
CURVE_COLUMNS = ["rho", "estimate", "se", "ci_lower", "ci_upper",
                 "beta_true", "fh_lower", "fh_upper", "true_fna"]


def _replicate(
    index: int,
    spec: DgpSpec,
    n: int,
    grid: np.ndarray,
    folds: int,
    model_spec: ModelSpec,
    seed: np.random.SeedSequence,
    level: float,
) -> np.ndarray:
    """One replication; returns a ``(4, len(grid))`` array of estimate, se, ci_lower, ci_upper."""
    rng = np.random.default_rng(seed)
    sample = generate(spec, n, rng)
    try:
        fit = cross_fit(sample.data, folds=folds, model_spec=model_spec,
                        seed=int(rng.integers(2**32)))
    except FoldDegenerate as exc:
        raise FoldDegenerate(exc.detail, replication=index) from exc
    curve = sensitivity_curve(sample.data, fit, grid, level)
    logger.info("replication %d done", index)
    return np.vstack([curve.estimates, curve.se, curve.ci_lower, curve.ci_upper])


def _seed_sequences(
    replications: int,
    master_seed: Optional[int],
    seeds: Optional[Sequence[int]],
) -> List[np.random.SeedSequence]:
    if seeds is not None:
        if len(seeds) != replications:
            raise InvalidInput(f"{len(seeds)} seeds given for {replications} replications")
        return [np.random.SeedSequence(s) for s in seeds]
    return np.random.SeedSequence(master_seed).spawn(replications)


def run_study(
    spec: DgpSpec,
    n: int = DESK_N,
    rho_list: Sequence[float] = (0.0,),
    replications: int = DESK_REPLICATIONS,
    folds: int = DEFAULT_FOLDS,
    model_spec: Optional[ModelSpec | str] = None,
    master_seed: Optional[int] = 0,
    level: float = DEFAULT_LEVEL,
    n_jobs: int = 1,
    seeds: Optional[Sequence[int]] = None,
    beta_true: Optional[Dict[float, float]] = None,
    n_outer: int = DEFAULT_OUTER,
    n_inner: int = DEFAULT_INNER,
    integrator: str = "monte_carlo",
) -> List[MetricsRow]:
    """
    Monte Carlo performance of ``beta_rho`` estimates under *spec*.

    Parameters
    ----------
    spec:
        Data-generating process.
    n, replications:
        Sample size per replication and number of replications (>= 2).
    rho_list:
        Correlations at which to estimate; sorted before use.
    model_spec:
        Nuisance learner; defaults to plain logistic for p <= 2, L1-CV otherwise.
    master_seed:
        Root of the per-replication seed tree.
    seeds:
        Explicit per-replication seeds, overriding *master_seed*.
    beta_true:
        Known truths per ``rho``; computed with :func:`true_beta` otherwise.

    Raises
    ------
    FoldDegenerate
        Carrying the failing replication's index.
    """
    if replications < 2:
        raise InvalidInput(f"replications must be at least 2, got {replications}")
    grid = np.sort(np.asarray(rho_list, dtype=float))
    learner = default_model_spec(spec) if model_spec is None else ModelSpec(model_spec)
    children = _seed_sequences(replications, master_seed, seeds)

    logger.info("study %s: n=%d, %d replications, rho=%s, %s nuisances",
                spec.case_id, n, replications, grid.tolist(), learner.value)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_replicate)(i, spec, n, grid, folds, learner, child, level)
        for i, child in enumerate(children)
    )
    stacked = np.stack(results)  # (replications, 4, len(grid))

    rows: List[MetricsRow] = []
    for j, rho in enumerate(grid):
        truth = (beta_true or {}).get(float(rho))
        if truth is None:
            truth = true_beta(spec, float(rho), n_outer, n_inner, None, integrator)
        est, se, lo, hi = stacked[:, 0, j], stacked[:, 1, j], stacked[:, 2, j], stacked[:, 3, j]
        rows.append(MetricsRow(
            case_id=spec.case_id,
            rho=float(rho),
            beta_true=float(truth),
            bias=float(est.mean() - truth),
            sd=float(est.std(ddof=1)),
            ese=float(se.mean()),
            cp95=float(np.mean((lo <= truth) & (truth <= hi))),
            n=n,
            replications=replications,
        ))
    return rows


def metrics_frame(rows: Sequence[MetricsRow]) -> pd.DataFrame:
    """Study rows as a table, one line per ``(case, rho)``."""
    return pd.DataFrame([r.to_dict() for r in rows], columns=METRICS_COLUMNS)


def curve_data(
    spec: DgpSpec,
    n: int,
    rho_grid: Sequence[float],
    seed: Optional[int] = 0,
    folds: int = DEFAULT_FOLDS,
    model_spec: Optional[ModelSpec | str] = None,
    level: float = DEFAULT_LEVEL,
    n_outer: int = DEFAULT_OUTER,
    n_inner: int = DEFAULT_INNER,
    integrator: str = "monte_carlo",
) -> pd.DataFrame:
    """
    One simulated dataset's estimated curve next to the truth.

    Columns: rho, estimate, se, ci_lower, ci_upper, beta_true, fh_lower,
    fh_upper, true_fna.  The Frechet-Hoeffding columns are the plug-in
    population bounds and do not vary with ``rho``.
    """
    rng = np.random.default_rng(seed)
    sample = generate(spec, n, rng)
    learner = default_model_spec(spec) if model_spec is None else ModelSpec(model_spec)
    fit = cross_fit(sample.data, folds=folds, model_spec=learner, seed=int(rng.integers(2**32)))
    curve = sensitivity_curve(sample.data, fit, rho_grid, level)
    fh = fh_population_bounds(fit)

    frame = curve.to_frame()
    frame["beta_true"] = [true_beta(spec, float(r), n_outer, n_inner, None, integrator)
                          for r in curve.rho_grid]
    frame["fh_lower"] = fh.lower
    frame["fh_upper"] = fh.upper
    frame["true_fna"] = sample.latent.empirical_fna()
    return frame[CURVE_COLUMNS]

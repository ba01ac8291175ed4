"""
fna-sensitivity – command-line interface
========================================

Usage
-----
::

    python -m fna_sensitivity COMMAND [OPTIONS]

Commands
--------
bounds      Closed-form bounds at ``--mu0/--mu1``, or plug-in population
            bounds for a CSV file.
rho-range   Per-unit feasible correlation ranges, selected ``rho_u`` and coverage.
estimate    Cross-fitted estimate of ``beta_rho`` at ``--rho``.
curve       Estimates along ``--rho-grid`` (CSV by default).
ate         Doubly robust average treatment effect.
simulate    Replication study for built-in designs (CSV by default).

Common options
--------------
--output, -o    Output file (default: stdout).
--format, -f    ``json`` or ``csv``.
--seed          Seed for every random choice (drawn from OS entropy if absent).
--folds         Cross-fitting folds (default 2, or ``$FNA_FOLDS``).
--level         Confidence level (default 0.95, or ``$FNA_LEVEL``).
--verbose, -v   Enable DEBUG logging.

Examples
--------
::

    python -m fna_sensitivity bounds --mu0 0.69 --mu1 0.842
    python -m fna_sensitivity rho-range data.csv --step 0.05
    python -m fna_sensitivity curve data.csv --rho-grid 0:0.3:0.05 -o curve.csv
    python -m fna_sensitivity simulate --case C1 --rho 0 --n 1000 --reps 500 --seed 7
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from .exceptions import ConfigError, FnaError, OutputError
from .io.config import RunConfig
from .io.report import build_report, emit_frame, emit_sidecar, emit_text, to_json
from .models import ModelSpec
from .pipeline.analysis import FnaAnalysis
from .simulation.study import metrics_frame

logger = logging.getLogger(__name__)

_CSV_BY_DEFAULT = ("curve", "simulate")


def _common(p: argparse.ArgumentParser, data: bool = True) -> None:
    p.add_argument("--output", "-o", default="-", metavar="FILE",
                   help="Output file (default: stdout)")
    p.add_argument("--format", "-f", choices=["json", "csv"], default=None,
                   help="Output format (default: csv for curve/simulate, json otherwise)")
    p.add_argument("--seed", type=int, default=None,
                   help="Random seed (drawn from OS entropy and recorded when absent)")
    p.add_argument("--folds", type=int, default=None,
                   help="Cross-fitting folds (default 2 or $FNA_FOLDS)")
    p.add_argument("--level", type=float, default=None,
                   help="Confidence level (default 0.95 or $FNA_LEVEL)")
    p.add_argument("--model", choices=[m.value for m in ModelSpec], default=None,
                   help="Nuisance learner: plain logistic (default) or l1_cv")
    p.add_argument("--timing", action="store_true",
                   help="Record wall-clock timing in the JSON report")
    p.add_argument("--verbose", "-v", action="store_true",
                   help="Enable verbose (DEBUG) logging")
    if data:
        p.add_argument("--covariates", default=None, metavar="COLS",
                       help="Comma-separated covariate columns (default: all but y and a)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fna-sensitivity",
        description="Bounds, sensitivity analysis and estimation of the fraction negatively affected",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="Closed-form or plug-in population bounds")
    p.add_argument("input", nargs="?", default=None, help="CSV file (optional)")
    p.add_argument("--mu0", type=float, default=None, help="E[Y0 | x]")
    p.add_argument("--mu1", type=float, default=None, help="E[Y1 | x]")
    p.add_argument("--rho-l", dest="rho_l", type=float, default=None,
                   help="Lower end of the correlation range")
    p.add_argument("--rho-u", dest="rho_u", type=float, default=None,
                   help="Upper end of the correlation range")
    _common(p)

    p = sub.add_parser("rho-range", help="Data-driven choice of rho_u")
    p.add_argument("input", help="CSV file")
    p.add_argument("--quantile", type=float, default=0.95,
                   help="Quantile of the per-unit upper limits (default 0.95)")
    p.add_argument("--step", type=float, default=None,
                   help="Round the quantile up to a multiple of STEP")
    p.add_argument("--rho-u", dest="rho_u", type=float, default=None,
                   help="Report coverage of this rho_u instead of the quantile")
    _common(p)

    p = sub.add_parser("estimate", help="Estimate beta_rho at one correlation")
    p.add_argument("input", help="CSV file")
    p.add_argument("--rho", type=float, default=0.0, help="Correlation (default 0)")
    _common(p)

    p = sub.add_parser("curve", help="Estimate beta_rho along a grid")
    p.add_argument("input", help="CSV file")
    p.add_argument("--rho-grid", dest="rho_grid", default="0:0.3:0.05",
                   help="start:stop:step or comma list (default 0:0.3:0.05); "
                        "write --rho-grid=-0.3:0.3:0.1 when the grid starts below 0")
    _common(p)

    p = sub.add_parser("ate", help="Doubly robust average treatment effect")
    p.add_argument("input", help="CSV file")
    _common(p)

    p = sub.add_parser("simulate", help="Replication study for built-in designs")
    p.add_argument("--case", action="append", required=True,
                   help="Design C1..C6; repeat for several")
    p.add_argument("--rho", type=float, default=0.0, help="Single correlation (default 0)")
    p.add_argument("--rho-grid", dest="rho_grid", default=None,
                   help="Several correlations: start:stop:step or comma list; "
                        "use the --rho-grid=-0.3:0.3:0.1 form for negative starts")
    p.add_argument("--n", type=int, default=1000, help="Sample size (default 1000)")
    p.add_argument("--reps", type=int, default=500, help="Replications (default 500)")
    p.add_argument("--jobs", type=int, default=1, help="Parallel workers (default 1)")
    p.add_argument("--integrator", choices=["monte_carlo", "quadrature"],
                   default="monte_carlo", help="Truth integrator over the latent variable")
    _common(p, data=False)
    return parser


def _error(exc: FnaError) -> None:
    print(json.dumps({"error": exc.to_dict()}), file=sys.stderr)


def _run(config: RunConfig) -> Tuple[Dict[str, Any], Optional[pd.DataFrame], List[str]]:
    """Execute *config*; returns JSON results, an optional table and warnings."""
    analysis = FnaAnalysis(
        folds=config.folds,
        model_spec=config.model_spec or ModelSpec.PLAIN,
        seed=config.seed,
        level=config.level,
    )
    command = config.command

    if command == "simulate":
        rows = analysis.simulate(
            config.cases, config.n, config.rho_grid, config.replications,
            n_jobs=config.n_jobs, integrator=config.integrator,
            model_spec=config.model_spec,
        )
        return {"metrics": [r.to_dict() for r in rows]}, metrics_frame(rows), analysis.warnings

    if command == "bounds" and config.input is None:
        results = analysis.pointwise_bounds(config.mu0, config.mu1, config.rho_l, config.rho_u)
        return results, None, analysis.warnings

    analysis.load(config.input, config.covariates)  # type: ignore[arg-type]
    if command == "bounds":
        return analysis.population_bounds(config.rho_l, config.rho_u), None, analysis.warnings
    if command == "rho-range":
        selection = analysis.rho_range(config.quantile, config.step, config.rho_u)
        return selection.to_dict(), selection.to_frame(), analysis.warnings
    if command == "estimate":
        return analysis.estimate(config.rho).to_dict(), None, analysis.warnings
    if command == "curve":
        frame = analysis.curve_frame(config.rho_grid)
        return {"level": config.level, "n": analysis.fit.n,
                "points": frame.to_dict(orient="records")}, frame, analysis.warnings
    return analysis.ate().to_dict(), None, analysis.warnings


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.format is None:
        args.format = "csv" if args.command in _CSV_BY_DEFAULT else "json"

    try:
        config = RunConfig.from_namespace(args)
    except ConfigError as exc:
        _error(exc)
        return 2

    started = time.perf_counter()
    try:
        results, table, warnings = _run(config)
    except FnaError as exc:
        _error(exc)
        return 1
    elapsed = time.perf_counter() - started

    report = build_report(config, results, warnings, {"seconds": elapsed})
    if config.output_format == "csv" and table is None:
        _error(ConfigError(f"{config.command} has no tabular output; use --format json"))
        return 2
    try:
        if table is not None and config.output_format == "csv":
            emit_frame(table, config.output)
            emit_sidecar(report, config.output)
        else:
            emit_text(to_json(report), config.output)
    except OutputError as exc:
        _error(exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

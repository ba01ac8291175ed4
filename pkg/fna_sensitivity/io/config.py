"""
Run configuration
=================

:class:`RunConfig` is the resolved, validated set of parameters for one CLI
command.  Defaults for ``--folds`` and ``--level`` can be overridden through
the ``FNA_FOLDS`` and ``FNA_LEVEL`` environment variables; explicit flags win.
"""
from __future__ import annotations

import argparse
import math
import os
from dataclasses import asdict, dataclass
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from ..exceptions import ConfigError
from ..models import ModelSpec
from ..nuisance.cross_fit import DEFAULT_FOLDS

DEFAULT_LEVEL = 0.95
DEFAULT_QUANTILE = 0.95
ENV_FOLDS = "FNA_FOLDS"
ENV_LEVEL = "FNA_LEVEL"
# Slack allowed when the stop of a start:stop:step grid is hit.
GRID_TOL = 1e-9

COMMANDS = ("bounds", "rho-range", "estimate", "curve", "ate", "simulate")
FILE_COMMANDS = ("rho-range", "estimate", "curve", "ate")


def parse_grid(text: str) -> Tuple[float, ...]:
    """
    Parse a correlation grid.

    Accepts ``start:stop:step`` (stop included when hit within ``GRID_TOL``)
    or a comma-separated list.  The result must be ascending.
    """
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ConfigError(f"grid {text!r} must look like start:stop:step")
            start, stop, step = parts
            if step <= 0.0:
                raise ConfigError(f"grid step must be positive, got {step}")
            if stop < start:
                raise ConfigError(f"grid stop {stop} is below start {start}")
            count = int(math.floor((stop - start) / step + GRID_TOL)) + 1
            values = np.round(start + step * np.arange(count), 12)
        else:
            values = np.array([float(p) for p in text.split(",") if p.strip()])
    except ValueError as exc:
        raise ConfigError(f"cannot parse grid {text!r}: {exc}") from exc
    if values.size == 0:
        raise ConfigError("grid is empty")
    if np.any(np.diff(values) < 0.0):
        raise ConfigError(f"grid {text!r} must be ascending")
    return tuple(float(v) for v in values)


def _env_default(environ: Mapping[str, str], key: str, cast, fallback):
    raw = environ.get(key)
    if raw is None or raw.strip() == "":
        return fallback
    try:
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"environment variable {key}={raw!r} is invalid: {exc}") from exc


def _given(value: Any, default: Any) -> Any:
    """*value* unless it was not supplied; zero is a supplied value."""
    return default if value is None else value


@dataclass(frozen=True)
class RunConfig:
    """Resolved parameters of one command."""

    command: str
    input: Optional[str] = None
    output: str = "-"
    output_format: str = "json"
    covariates: Optional[Tuple[str, ...]] = None
    mu0: Optional[float] = None
    mu1: Optional[float] = None
    rho: float = 0.0
    rho_l: Optional[float] = None
    rho_u: Optional[float] = None
    rho_grid: Tuple[float, ...] = (0.0,)
    folds: int = DEFAULT_FOLDS
    model_spec: Optional[ModelSpec] = None
    quantile: float = DEFAULT_QUANTILE
    step: Optional[float] = None
    level: float = DEFAULT_LEVEL
    seed: Optional[int] = None
    cases: Tuple[str, ...] = ()
    n: int = 1000
    replications: int = 500
    n_jobs: int = 1
    integrator: str = "monte_carlo"
    timing: bool = False

    def validate(self) -> RunConfig:
        """Check invariants; returns ``self`` so calls can be chained."""
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not (0.0 < self.level < 1.0):
            raise ConfigError(f"level must lie in (0, 1), got {self.level}")
        if self.folds < 2:
            raise ConfigError(f"folds must be at least 2, got {self.folds}")
        if not (0.0 < self.quantile < 1.0):
            raise ConfigError(f"quantile must lie in (0, 1), got {self.quantile}")
        if any(b < a for a, b in zip(self.rho_grid, self.rho_grid[1:])):
            raise ConfigError("rho grid must be ascending")
        if self.rho_l is not None and self.rho_u is not None and self.rho_l > self.rho_u:
            raise ConfigError(f"rho_l ({self.rho_l}) exceeds rho_u ({self.rho_u})")
        for name in ("rho", "rho_l", "rho_u"):
            value = getattr(self, name)
            if value is not None and not -1.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [-1, 1]")
        if self.command in FILE_COMMANDS and not self.input:
            raise ConfigError(f"{self.command} needs an input CSV file")
        if self.command == "bounds" and not self.input:
            if self.mu0 is None or self.mu1 is None:
                raise ConfigError("bounds needs --mu0 and --mu1 or an input CSV file")
        if self.command == "simulate":
            if not self.cases:
                raise ConfigError("simulate needs at least one --case")
            if self.replications < 2:
                raise ConfigError("replications must be at least 2")
            if self.n < 2:
                raise ConfigError("n must be at least 2")
            if self.n_jobs == 0:
                raise ConfigError("jobs must be a positive count or negative (all cores)")
        if not self.output:
            raise ConfigError("output path is empty")
        return self

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["model_spec"] = self.model_spec.value if self.model_spec is not None else None
        d["rho_grid"] = list(self.rho_grid)
        d["cases"] = list(self.cases)
        d["covariates"] = list(self.covariates) if self.covariates is not None else None
        return d

    @classmethod
    def from_namespace(
        cls,
        args: argparse.Namespace,
        environ: Optional[Mapping[str, str]] = None,
    ) -> RunConfig:
        """Resolve *args* plus environment defaults into a validated config."""
        env = os.environ if environ is None else environ

        def get(name: str, default: Any = None) -> Any:
            return getattr(args, name, default)

        folds = get("folds")
        if folds is None:
            folds = _env_default(env, ENV_FOLDS, int, DEFAULT_FOLDS)
        level = get("level")
        if level is None:
            level = _env_default(env, ENV_LEVEL, float, DEFAULT_LEVEL)

        seed = get("seed")
        if seed is None:
            seed = int(np.random.SeedSequence().entropy % (2**63))

        grid_text = get("rho_grid")
        rho_grid = parse_grid(grid_text) if grid_text else (float(_given(get("rho"), 0.0)),)
        covariates = get("covariates")
        model = get("model")
        try:
            model_spec = ModelSpec(model) if model else None
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

        rho_u = get("rho_u")
        rho_l = get("rho_l")
        return cls(
            command=args.command,
            input=get("input"),
            output=get("output", "-") or "-",
            output_format=get("format", "json") or "json",
            covariates=tuple(c.strip() for c in covariates.split(",")) if covariates else None,
            mu0=get("mu0"),
            mu1=get("mu1"),
            rho=float(_given(get("rho"), 0.0)),
            rho_l=float(rho_l) if rho_l is not None else None,
            rho_u=float(rho_u) if rho_u is not None else None,
            rho_grid=rho_grid,
            folds=int(folds),
            model_spec=model_spec,
            quantile=float(_given(get("quantile"), DEFAULT_QUANTILE)),
            step=get("step"),
            level=float(level),
            seed=int(seed),
            cases=tuple(c.upper() for c in (get("case") or ())),
            n=int(_given(get("n"), 1000)),
            replications=int(_given(get("reps"), 500)),
            n_jobs=int(_given(get("jobs"), 1)),
            integrator=get("integrator", "monte_carlo") or "monte_carlo",
            timing=bool(get("timing", False)),
        ).validate()

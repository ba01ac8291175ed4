"""
Core data models for fna_sensitivity.

Every value object exchanged between the bound formulas, the oracle, the
nuisance learners, the estimators and the simulation harness lives here as a
dataclass with invariant checks in ``__post_init__`` and a ``to_dict`` used by
the JSON reports.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from .exceptions import InvalidInput

# Tolerance used when checking probabilities and table sums.
PROB_TOL = 1e-12


def _check_probability(name: str, value: float, tol: float = 0.0) -> None:
    if not (math.isfinite(value) and -tol <= value <= 1.0 + tol):
        raise InvalidInput(f"{name} must be a probability in [0, 1], got {value!r}")


# ---------------------------------------------------------------------------
# Pointwise bound types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarginalPair:
    """Conditional outcome means ``(mu0, mu1)`` at one covariate point."""

    mu0: float
    mu1: float

    def __post_init__(self) -> None:
        _check_probability("mu0", self.mu0)
        _check_probability("mu1", self.mu1)

    @property
    def tau(self) -> float:
        """Conditional average treatment effect ``mu1 - mu0``."""
        return self.mu1 - self.mu0

    @property
    def sd_product(self) -> float:
        """Product of the two potential-outcome standard deviations."""
        v = self.mu0 * (1.0 - self.mu0) * self.mu1 * (1.0 - self.mu1)
        return math.sqrt(max(v, 0.0))

    @property
    def independent_fna(self) -> float:
        """``mu0 * (1 - mu1)``, the harm rate under conditional independence."""
        return self.mu0 * (1.0 - self.mu1)

    @property
    def is_degenerate(self) -> bool:
        return self.mu0 in (0.0, 1.0) or self.mu1 in (0.0, 1.0)

    @property
    def odds_ratio_ay(self) -> float:
        """Odds ratio of treatment on outcome; ``inf`` when a denominator is zero."""
        den = (1.0 - self.mu1) * self.mu0
        if den == 0.0:
            return math.inf
        return self.mu1 * (1.0 - self.mu0) / den

    def to_dict(self) -> Dict[str, Any]:
        return {"mu0": self.mu0, "mu1": self.mu1, "tau": self.tau,
                "sd_product": self.sd_product}


@dataclass(frozen=True)
class RhoInterval:
    """Sensitivity range ``[rho_l, rho_u]`` for ``Corr(Y0, Y1 | X)``."""

    rho_l: float
    rho_u: float

    def __post_init__(self) -> None:
        for name, v in (("rho_l", self.rho_l), ("rho_u", self.rho_u)):
            if not (math.isfinite(v) and -1.0 <= v <= 1.0):
                raise InvalidInput(f"{name} must lie in [-1, 1], got {v!r}")
        if self.rho_l > self.rho_u:
            raise InvalidInput(
                f"rho_l ({self.rho_l}) must not exceed rho_u ({self.rho_u})"
            )

    @classmethod
    def point(cls, rho: float) -> RhoInterval:
        return cls(rho, rho)

    def contains(self, rho: float, tol: float = 0.0) -> bool:
        return self.rho_l - tol <= rho <= self.rho_u + tol

    @property
    def width(self) -> float:
        return self.rho_u - self.rho_l

    def to_dict(self) -> Dict[str, Any]:
        return {"rho_l": self.rho_l, "rho_u": self.rho_u}


@dataclass(frozen=True)
class BoundPair:
    """Lower and upper bound on a probability."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        _check_probability("lower", self.lower, PROB_TOL)
        _check_probability("upper", self.upper, PROB_TOL)
        if self.lower > self.upper + PROB_TOL:
            raise InvalidInput(
                f"lower bound {self.lower} exceeds upper bound {self.upper}"
            )

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= value <= self.upper + tol

    def is_within(self, other: BoundPair, tol: float = PROB_TOL) -> bool:
        """True when this interval is nested inside *other*."""
        return other.lower - tol <= self.lower and self.upper <= other.upper + tol

    def to_dict(self) -> Dict[str, Any]:
        return {"lower": self.lower, "upper": self.upper}


@dataclass(frozen=True)
class AssociationMeasures:
    """
    Association between ``Y0`` and ``Y1`` at one covariate point.

    ``None`` marks a measure that is undefined (zero variance for ``rho``,
    zero denominator cell for ``rr`` and ``or_``).
    """

    rho: Optional[float]
    rd: Optional[float]
    rr: Optional[float]
    or_: Optional[float]

    def to_dict(self) -> Dict[str, Any]:
        return {"rho": self.rho, "rd": self.rd, "rr": self.rr, "or": self.or_}


@dataclass(frozen=True)
class LowerBoundDecomposition:
    """Factored form of the sensitivity lower bound."""

    value: float
    harmful_best_case: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"value": self.value, "harmful_best_case": self.harmful_best_case}


@dataclass(frozen=True)
class UpperBoundCaps:
    """Caps on the upper bounds in terms of the treatment effect."""

    fh_cap: float
    indep_cap: float

    def to_dict(self) -> Dict[str, Any]:
        return {"fh_cap": self.fh_cap, "indep_cap": self.indep_cap}


# ---------------------------------------------------------------------------
# Joint distribution of the potential outcomes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JointTable:
    """
    Exact 2x2 joint distribution of ``(Y0, Y1)``.

    ``pi_jk = P(Y0 = j, Y1 = k | X = x)``; the harm rate is ``pi10`` and the
    benefit rate is ``pi01``.
    """

    pi00: float
    pi01: float
    pi10: float
    pi11: float

    def __post_init__(self) -> None:
        for name in ("pi00", "pi01", "pi10", "pi11"):
            _check_probability(name, getattr(self, name), PROB_TOL)
        total = self.pi00 + self.pi01 + self.pi10 + self.pi11
        if abs(total - 1.0) > PROB_TOL:
            raise InvalidInput(f"cells must sum to 1, got {total!r}")

    @property
    def mu0(self) -> float:
        return self.pi10 + self.pi11

    @property
    def mu1(self) -> float:
        return self.pi01 + self.pi11

    @property
    def fna(self) -> float:
        return self.pi10

    @property
    def fpa(self) -> float:
        return self.pi01

    def marginals(self) -> MarginalPair:
        return MarginalPair(min(max(self.mu0, 0.0), 1.0), min(max(self.mu1, 0.0), 1.0))

    def to_dict(self) -> Dict[str, Any]:
        return {"pi00": self.pi00, "pi01": self.pi01,
                "pi10": self.pi10, "pi11": self.pi11}


@dataclass(frozen=True)
class ExtremizeResult:
    """Extremal harm rates over a scanned correlation grid with their witnesses."""

    min_fna: float
    max_fna: float
    witness_low: JointTable
    witness_high: JointTable
    rho_low: float
    rho_high: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "min_fna": self.min_fna,
            "max_fna": self.max_fna,
            "rho_low": self.rho_low,
            "rho_high": self.rho_high,
            "witness_low": self.witness_low.to_dict(),
            "witness_high": self.witness_high.to_dict(),
        }


@dataclass(frozen=True)
class Attainability:
    lower_attained: bool
    upper_attained: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"lower_attained": self.lower_attained,
                "upper_attained": self.upper_attained}


# ---------------------------------------------------------------------------
# Observed data and nuisance fits
# ---------------------------------------------------------------------------


def _as_binary(name: str, values: Any, n: int) -> np.ndarray:
    arr = np.asarray(values)
    if arr.shape != (n,):
        raise InvalidInput(f"{name} must be a vector of length {n}, got shape {arr.shape}")
    if not np.all((arr == 0) | (arr == 1)):
        raise InvalidInput(f"{name} must contain only 0/1 values")
    return arr.astype(np.int8)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Observed sample: covariates ``X`` (n x p), treatment ``A``, outcome ``Y``."""

    covariates: np.ndarray
    treatment: np.ndarray
    outcome: np.ndarray
    covariate_names: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        x = np.asarray(self.covariates, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise InvalidInput(f"covariates must be an n x p matrix with n, p >= 1, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InvalidInput("covariates must not contain missing or infinite values")
        n, p = x.shape
        a = _as_binary("treatment", self.treatment, n)
        y = _as_binary("outcome", self.outcome, n)
        if a.min() == a.max():
            raise InvalidInput("both treatment arms must be present")
        names = tuple(self.covariate_names) or tuple(f"x{j + 1}" for j in range(p))
        if len(names) != p:
            raise InvalidInput(f"expected {p} covariate names, got {len(names)}")
        object.__setattr__(self, "covariates", x)
        object.__setattr__(self, "treatment", a)
        object.__setattr__(self, "outcome", y)
        object.__setattr__(self, "covariate_names", names)

    @property
    def n(self) -> int:
        return self.covariates.shape[0]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]

    def arm_counts(self) -> Tuple[int, int]:
        """Return ``(n_treated, n_control)``."""
        treated = int(self.treatment.sum())
        return treated, self.n - treated

    def subset(self, index: np.ndarray) -> Dataset:
        return Dataset(
            self.covariates[index],
            self.treatment[index],
            self.outcome[index],
            self.covariate_names,
        )

    def equals(self, other: Dataset) -> bool:
        return (
            self.covariate_names == other.covariate_names
            and np.array_equal(self.covariates, other.covariates)
            and np.array_equal(self.treatment, other.treatment)
            and np.array_equal(self.outcome, other.outcome)
        )

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.covariates, columns=list(self.covariate_names))
        frame.insert(0, "a", self.treatment.astype(int))
        frame.insert(0, "y", self.outcome.astype(int))
        return frame

    def __repr__(self) -> str:
        treated, control = self.arm_counts()
        return f"Dataset(n={self.n}, p={self.p}, treated={treated}, control={control})"


class Penalty(str, Enum):
    NONE = "none"
    L1 = "l1"


class ModelSpec(str, Enum):
    """Nuisance learner family used by cross-fitting."""

    PLAIN = "plain"
    L1_CV = "l1_cv"


@dataclass(frozen=True, eq=False)
class LogisticModel:
    """A fitted logistic regression ``P(label = 1 | x) = expit(b0 + x'b)``."""

    intercept: float
    coefficients: np.ndarray
    penalty: Penalty = Penalty.NONE
    lambda_: Optional[float] = None
    n_iter: int = 0
    converged: bool = True

    # Predictions are kept strictly inside (0, 1).
    PREDICTION_FLOOR = 1e-12

    def decision_function(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        return self.intercept + x @ self.coefficients

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        from scipy.special import expit

        p = expit(self.decision_function(features))
        return np.clip(p, self.PREDICTION_FLOOR, 1.0 - self.PREDICTION_FLOOR)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "intercept": self.intercept,
            "coefficients": [float(c) for c in self.coefficients],
            "penalty": self.penalty.value,
            "lambda": self.lambda_,
            "n_iter": self.n_iter,
            "converged": self.converged,
        }


@dataclass(frozen=True, eq=False)
class NuisanceFit:
    """
    Out-of-fold nuisance predictions ``(e_hat, mu0_hat, mu1_hat)``.

    Each unit's predictions come from models trained without the unit's fold.
    """

    e_hat: np.ndarray
    mu0_hat: np.ndarray
    mu1_hat: np.ndarray
    fold_assignment: np.ndarray
    eps_e: float = 0.01
    eps_mu: float = 0.001
    model_spec: ModelSpec = ModelSpec.PLAIN
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.e_hat)
        for name in ("mu0_hat", "mu1_hat", "fold_assignment"):
            if len(getattr(self, name)) != n:
                raise InvalidInput(f"{name} length differs from e_hat length {n}")
        for name, arr, eps in (
            ("e_hat", self.e_hat, self.eps_e),
            ("mu0_hat", self.mu0_hat, self.eps_mu),
            ("mu1_hat", self.mu1_hat, self.eps_mu),
        ):
            arr = np.array(arr, dtype=float)
            if np.any(arr < eps) or np.any(arr > 1.0 - eps):
                raise InvalidInput(f"{name} must lie in [{eps}, {1.0 - eps}]")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        folds = np.array(self.fold_assignment, dtype=int)
        folds.setflags(write=False)
        object.__setattr__(self, "fold_assignment", folds)

    @property
    def n(self) -> int:
        return len(self.e_hat)

    def marginal(self, i: int) -> MarginalPair:
        return MarginalPair(float(self.mu0_hat[i]), float(self.mu1_hat[i]))

    def tau_hat(self) -> np.ndarray:
        return self.mu1_hat - self.mu0_hat

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "fold": self.fold_assignment,
            "e_hat": self.e_hat,
            "mu0_hat": self.mu0_hat,
            "mu1_hat": self.mu1_hat,
        })


# ---------------------------------------------------------------------------
# Estimator outputs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InfluenceRow:
    """Influence-function pieces for one unit at a given ``rho``."""

    phi_beta: float
    phi_gamma: float
    g_value: float
    varphi: float

    def to_dict(self) -> Dict[str, Any]:
        return {"phi_beta": self.phi_beta, "phi_gamma": self.phi_gamma,
                "g_value": self.g_value, "varphi": self.varphi}


@dataclass(frozen=True, eq=False)
class InfluenceTable:
    """Column-wise collection of :class:`InfluenceRow` values."""

    rho: float
    phi_beta: np.ndarray
    phi_gamma: np.ndarray
    g_value: np.ndarray
    varphi: np.ndarray

    def __len__(self) -> int:
        return len(self.phi_beta)

    def row(self, i: int) -> InfluenceRow:
        return InfluenceRow(
            float(self.phi_beta[i]),
            float(self.phi_gamma[i]),
            float(self.g_value[i]),
            float(self.varphi[i]),
        )


@dataclass(frozen=True)
class EstimateReport:
    """Point estimate with influence-function standard error and Wald interval."""

    estimate: float
    se: float
    ci_lower: float
    ci_upper: float
    level: float
    n: int
    rho: Optional[float] = None
    target: str = "beta"
    warnings: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.se < 0 or not math.isfinite(self.se):
            raise InvalidInput(f"se must be a nonnegative finite number, got {self.se!r}")
        if not (0.0 < self.level < 1.0):
            raise InvalidInput(f"level must lie in (0, 1), got {self.level!r}")

    def covers(self, value: float) -> bool:
        return self.ci_lower <= value <= self.ci_upper

    def to_dict(self) -> Dict[str, Any]:
        return {
            "target": self.target,
            "rho": self.rho,
            "estimate": self.estimate,
            "se": self.se,
            "ci_lower": self.ci_lower,
            "ci_upper": self.ci_upper,
            "level": self.level,
            "n": self.n,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class PolicyBounds:
    """Estimated lower and upper bounds on the harm rate among the treated-by-policy."""

    lower: EstimateReport
    upper: EstimateReport

    def to_dict(self) -> Dict[str, Any]:
        return {"lower": self.lower.to_dict(), "upper": self.upper.to_dict()}


@dataclass(frozen=True, eq=False)
class CurveReport:
    """Estimates of ``beta_rho`` along an ascending grid of ``rho`` values."""

    rho_grid: np.ndarray
    estimates: np.ndarray
    se: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    level: float
    n: int
    warnings: Tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.rho_grid)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "rho": self.rho_grid,
            "estimate": self.estimates,
            "se": self.se,
            "ci_lower": self.ci_lower,
            "ci_upper": self.ci_upper,
        })

    def to_dict(self) -> Dict[str, Any]:
        return {
            "level": self.level,
            "n": self.n,
            "points": self.to_frame().to_dict(orient="records"),
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True, eq=False)
class RhoRangeSelection:
    """Data-driven choice of ``rho_u`` from per-unit feasible correlation ranges."""

    rho_u: float
    coverage: float
    quantile: float
    per_unit_upper: np.ndarray
    per_unit_lower: np.ndarray
    skipped: int = 0

    def coverage_of(self, rho_u: float) -> float:
        """Fraction of units whose feasible upper correlation is at most *rho_u*."""
        if len(self.per_unit_upper) == 0:
            return 0.0
        return float(np.mean(self.per_unit_upper <= rho_u))

    def central_interval(self, values: np.ndarray, mass: float = 0.95) -> Tuple[float, float]:
        tail = (1.0 - mass) / 2.0
        return float(np.quantile(values, tail)), float(np.quantile(values, 1.0 - tail))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"rho_lower": self.per_unit_lower,
                             "rho_upper": self.per_unit_upper})

    def to_dict(self) -> Dict[str, Any]:
        d: Dict[str, Any] = {
            "rho_u": self.rho_u,
            "coverage": self.coverage,
            "quantile": self.quantile,
            "skipped": self.skipped,
            "n_units": int(len(self.per_unit_upper)),
        }
        if len(self.per_unit_upper):
            d["max_upper"] = float(self.per_unit_upper.max())
            d["upper_central_95"] = list(self.central_interval(self.per_unit_upper))
            d["lower_central_95"] = list(self.central_interval(self.per_unit_lower))
        return d


# ---------------------------------------------------------------------------
# Simulation types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OutcomeSpec:
    """``P(Y_a = 1 | X, U) = expit(intercept + X'coefficients + u_loading * U)``."""

    intercept: float
    coefficients: Tuple[float, ...]
    u_loading: float

    def to_dict(self) -> Dict[str, Any]:
        return {"intercept": self.intercept,
                "coefficients": list(self.coefficients),
                "u_loading": self.u_loading}


@dataclass(frozen=True)
class DgpSpec:
    """A logistic-latent data-generating process for ``(X, A, Y0, Y1)``."""

    case_id: str
    p: int
    propensity: Tuple[float, ...]
    outcome0: OutcomeSpec
    outcome1: OutcomeSpec
    seed: int = 0
    propensity_intercept: float = 0.0

    def __post_init__(self) -> None:
        if self.p < 1:
            raise InvalidInput(f"p must be at least 1, got {self.p}")
        for name, coef in (
            ("propensity", self.propensity),
            ("outcome0", self.outcome0.coefficients),
            ("outcome1", self.outcome1.coefficients),
        ):
            if len(coef) != self.p:
                raise InvalidInput(f"{name} needs {self.p} coefficients, got {len(coef)}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "case_id": self.case_id,
            "p": self.p,
            "propensity_intercept": self.propensity_intercept,
            "propensity": list(self.propensity),
            "outcome0": self.outcome0.to_dict(),
            "outcome1": self.outcome1.to_dict(),
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class LatentTruth:
    """Unobserved per-unit quantities retained by the generator for oracles."""

    y0: np.ndarray
    y1: np.ndarray
    u: np.ndarray
    e: np.ndarray
    mu0: np.ndarray
    mu1: np.ndarray

    def empirical_fna(self) -> float:
        return float(np.mean((self.y0 == 1) & (self.y1 == 0)))


@dataclass(frozen=True, eq=False)
class SimulatedSample:
    """A generated dataset together with its latent truth."""

    data: Dataset
    latent: LatentTruth


@dataclass(frozen=True)
class ToyExample:
    """Exact quantities of the two-point latent-variable example."""

    mu0: float
    mu1: float
    fna: float
    rho: float
    independent_fna: float
    sd_product: float
    fh: BoundPair

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mu0": self.mu0,
            "mu1": self.mu1,
            "fna": self.fna,
            "rho": self.rho,
            "independent_fna": self.independent_fna,
            "sd_product": self.sd_product,
            "fh": self.fh.to_dict(),
        }


@dataclass(frozen=True)
class MetricsRow:
    """Monte Carlo performance of the estimator at one ``(case, rho)``."""

    case_id: str
    rho: float
    beta_true: float
    bias: float
    sd: float
    ese: float
    cp95: float
    n: int
    replications: int

    def __post_init__(self) -> None:
        if not (0.0 <= self.cp95 <= 1.0):
            raise InvalidInput(f"cp95 must lie in [0, 1], got {self.cp95!r}")
        if self.sd < 0 or self.ese < 0:
            raise InvalidInput("sd and ese must be nonnegative")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "case_id": self.case_id,
            "rho": self.rho,
            "beta_true": self.beta_true,
            "bias": self.bias,
            "sd": self.sd,
            "ese": self.ese,
            "cp95": self.cp95,
            "n": self.n,
            "replications": self.replications,
        }

"""
fna-sensitivity
===============

Sharp bounds, correlation-based sensitivity analysis and cross-fitted
estimation of the fraction of individuals negatively affected (FNA) by a
binary treatment on a binary outcome.

Quick start
-----------
>>> from fna_sensitivity import FnaAnalysis, MarginalPair, fh_bounds
>>> round(fh_bounds(MarginalPair(0.690, 0.842)).upper, 3)
0.158
>>> analysis = FnaAnalysis(seed=1)
>>> data = analysis.load("data.csv")
>>> analysis.curve([0.0, 0.1, 0.2, 0.3]).to_frame()
"""

from .bounds.oracle import extremize_fna, joint_from_rho, measures_of
from .bounds.pointwise import (
    fh_bounds,
    general_bounds,
    rho_feasible_range,
    sensitivity_bounds,
)
from .estimators.beta import dr_ate, estimate_beta, sensitivity_curve
from .models import BoundPair, Dataset, JointTable, MarginalPair, RhoInterval
from .nuisance.cross_fit import cross_fit
from .pipeline.analysis import FnaAnalysis

__version__ = "0.1.0"
__all__ = [
    "BoundPair",
    "Dataset",
    "JointTable",
    "MarginalPair",
    "RhoInterval",
    "FnaAnalysis",
    "cross_fit",
    "dr_ate",
    "estimate_beta",
    "extremize_fna",
    "fh_bounds",
    "general_bounds",
    "joint_from_rho",
    "measures_of",
    "rho_feasible_range",
    "sensitivity_bounds",
    "sensitivity_curve",
]

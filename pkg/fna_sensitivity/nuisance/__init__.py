"""Propensity and outcome-regression nuisance fitting with cross-fitting."""

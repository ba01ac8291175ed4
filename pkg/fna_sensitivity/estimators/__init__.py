"""Influence-function estimators of the harm rate and related quantities."""

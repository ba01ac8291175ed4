"""Closed-form pointwise bounds and the joint-distribution oracle."""

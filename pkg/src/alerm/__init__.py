"""Constrained ERM, IPM estimators and generalization bounds for active learning."""

__version__ = "0.1.0"

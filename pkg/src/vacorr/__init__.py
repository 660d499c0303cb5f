"""Vacuum field correlations and dispersion interactions of neutral atoms."""

__version__ = "0.1.0"

"""Stochastic-geometry comparison of massive-MIMO and small-cell downlinks."""

__version__ = "0.1.0"

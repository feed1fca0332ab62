"""Weighted unit disk cover: exact and greedy baselines, shifting, and a block solver."""

__version__ = "0.1.0"

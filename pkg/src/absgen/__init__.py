"""Pair-concatenation one-shot learning: models, probes, and theory tools."""

__version__ = "0.1.0"

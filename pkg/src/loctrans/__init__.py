"""Exact algebra and geometry of local transformations of correlation scenarios."""

__version__ = "0.1.0"

"""Numerical structure theory for random systems of circle homeomorphisms."""

__version__ = "0.1.0"

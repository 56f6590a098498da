"""Numerical toolkit for Cauchy transforms, Orlicz coefficient spaces and
simultaneous approximation on the circle."""

__version__ = "0.1.0"

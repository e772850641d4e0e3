"""Tubular surfaces, their focal surfaces, and numerical checks of their curvature."""

__version__ = "0.1.0"

"""Numerical laboratory for subordinate killed Brownian motion."""

__version__ = "0.1.0"

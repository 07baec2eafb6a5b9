"""Measurements and bound checks for Gromov-hyperbolic spaces."""

__version__ = "0.1.0"

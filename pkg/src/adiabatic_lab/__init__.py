"""Numerical laboratory for strongly perturbed and adiabatic quantum dynamics."""

__version__ = "0.1.0"

"""Spectral simulation and exponent calculus for nonlinear Klein-Gordon on R^d x T^k."""

__version__ = "0.1.0"

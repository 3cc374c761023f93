"""Numerics for binary waveguide arrays and the one-dimensional nonlinear Dirac equation."""

__version__ = "0.1.0"

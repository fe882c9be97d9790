"""Weakly nonlinear geometric optics for the Westervelt equation and nonlinearity tomography."""

__version__ = "0.1.0"

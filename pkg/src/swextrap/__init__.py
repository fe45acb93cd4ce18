"""Perturbative-gadget simulation with local Schrieffer-Wolff series and Richardson extrapolation."""

__version__ = "0.1.0"

"""Symmetry-breaking bifurcation levels for nonlinear elliptic systems on
spheres and balls, verified by a spectral Galerkin continuation solver."""

from . import brouwer, continuation, euler_ring, polynomial, potentials, predictor, spectral

__all__ = [
    "brouwer",
    "continuation",
    "euler_ring",
    "polynomial",
    "potentials",
    "predictor",
    "spectral",
]

__version__ = "0.1.0"

"""Coupled finite element / boundary element solver for the acoustic wave
equation with convolution quadrature in time."""

from .genfun import GeneratingFunction, bdf2, from_name, trapezoidal, ttr

__version__ = "0.1.0"

__all__ = ["GeneratingFunction", "bdf2", "trapezoidal", "ttr", "from_name", "__version__"]

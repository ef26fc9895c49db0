"""Spectral and heat-kernel toolkit for Schrodinger operators of the form
(1+|x|^alpha) Lap - |x|^beta on R^N, with bound certificates."""

__version__ = "0.1.0"

from .model import OperatorParams, coefficient_functions, envelope, make_params

__all__ = [
    "OperatorParams",
    "coefficient_functions",
    "envelope",
    "make_params",
    "__version__",
]

"""Numerical toolkit for mean oscillation, Carleson measures, and
quasiconformal extension diagnostics on the half-plane and the disk."""

from ._kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]

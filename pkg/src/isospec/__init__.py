"""Isospectral deformations of two-step nilpotent metric Lie algebras.

Exact endomorphism-space construction (:mod:`endo_core`), sigma-deformations
(:mod:`deform`), harmonic polynomial calculus (:mod:`polyharmonic`), the
intertwining map and its exact checks (:mod:`intertwine`) and Galerkin
spectra (:mod:`spectral_lab`).
"""
from ._version import __version__
from .errors import IsospecError

__all__ = ["__version__", "IsospecError"]

"""Composite shock/rarefaction waves for relaxed compressible Navier-Stokes in Lagrangian form."""

__version__ = "0.1.0"

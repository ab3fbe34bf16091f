"""Penalized finite-volume solver for isentropic compressible Navier-Stokes on a torus."""

__version__ = "0.1.0"

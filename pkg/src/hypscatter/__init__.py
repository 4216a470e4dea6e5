"""Scattering determinants, zero distributions, and length spectra for
hyperbolic lattices, computed and cross-checked at desk scale.

Subpackages are organized around one concern each:

- hypgeom: hyperboloid model of hyperbolic d-space, Lorentz matrices,
  upper-half-space coordinates and the height action of isometries
- lattices: the arithmetic lattice models (SL2Z, Gamma0(p), SL2Zi) and
  exact double-coset enumeration at the cusps
- specfun: gamma, zeta, Dirichlet L-functions, Hardy Z and zeta zeros
- dirichlet: positive Dirichlet series (summatory functions, smoothed
  truncations, mean squares)
- scattering: scattering matrices, determinants and their normalized form
- zerodist: argument-principle zero counting and the distribution laws for
  zeros of the normalized scattering determinant
- lengths: geodesic length spectra, spectral comparison, Ruelle/surface
  zeta functions
- cli: the `hypscatter` command line tool
"""

__version__ = "0.1.0"

__all__ = [
    "hypgeom",
    "lattices",
    "specfun",
    "dirichlet",
    "scattering",
    "zerodist",
    "lengths",
]

"""Numerical laboratory for perturbations of the Riemannian Kerr and
Taub-bolt instantons: adapted tetrads and spin coefficients, separated
perturbation operators, angular and radial spectral analysis, and the
computational pieces of the mode-stability argument."""

__version__ = "0.1.0"

"""Spectral solvers and diagnostics for hydrostatic (primitive-equation) MHD and its scaled 3D counterpart."""

__version__ = "0.1.0"

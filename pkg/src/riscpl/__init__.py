"""Exact computation of relative interlevel set cohomology for piecewise
linear functions on finite simplicial complexes."""

__version__ = "0.1.0"

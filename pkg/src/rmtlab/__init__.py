"""Numerical laboratory for inhomogeneous symmetric random matrices."""

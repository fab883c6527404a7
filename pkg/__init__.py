"""Weighted anisotropic Poincare constants on convex planar domains."""

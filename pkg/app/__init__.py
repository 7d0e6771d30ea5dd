"""Traveling waves of the alignment model: numerics, PDE runs, analysis and experiments."""

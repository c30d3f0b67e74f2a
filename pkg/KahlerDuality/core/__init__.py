"""Numerical library: jets and expressions, potentials, forms, duality maps, verification."""

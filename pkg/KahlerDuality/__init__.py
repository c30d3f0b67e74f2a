"""Dual Kähler potentials, special λ-symplectic duality maps and their numerical verification."""

__version__ = "0.1.0"

"""Finite topological groupoids: sheaves, weak equivalences, fractions."""

__version__ = "0.1.0"

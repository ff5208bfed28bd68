"""Geometric optimization of a slowly driven qubit heat engine."""

__version__ = "0.1.0"

"""Exterior-algebra canonical forms and harmonic-space gauge field construction."""

__version__ = "0.1.0"

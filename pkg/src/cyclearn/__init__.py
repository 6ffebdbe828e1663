"""Sparse recovery of cyclic governing equations from snapshot bursts."""

__version__ = "0.1.0"

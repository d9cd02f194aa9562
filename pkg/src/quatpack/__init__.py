"""Exact arithmetic and enumeration for quaternionic sphere packings."""

__version__ = "0.1.0"

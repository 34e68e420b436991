"""Diversified trace synthesis from STL specifications via mixed-integer programming."""

__version__ = "0.1.0"

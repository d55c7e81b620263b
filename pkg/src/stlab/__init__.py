"""Twisted Lefschetz groups, Haar trace statistics and Frobenius equidistribution."""

__version__ = "0.1.0"
TOOL = "stlab"

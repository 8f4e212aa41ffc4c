"""Computational harmonic analysis on the Iwasawa groups N, A and S = AN."""

__version__ = "0.1.0"

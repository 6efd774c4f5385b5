"""Spectral classification of regular symmetric operators into n-entire classes."""

__version__ = "0.1.0"

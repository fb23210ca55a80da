"""Fourier-domain pricing of multi-asset European options with randomized QMC."""

__version__ = "0.1.0"

"""Penrose tilings from pentagrids and the Z-invariant Ising model on them."""

__version__ = "0.1.0"

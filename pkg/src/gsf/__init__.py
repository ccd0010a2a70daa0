"""Exact trace-form spaces over finite fields: construction, rank census, certificates."""

from gsf.ffield import FieldTower, Gf, PrimePower, find_irreducible

__version__ = "0.1.0"

__all__ = ["FieldTower", "Gf", "PrimePower", "find_irreducible", "__version__"]

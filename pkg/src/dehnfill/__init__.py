"""Neumann-Zagier volume asymptotics for Dehn fillings of one-cusped manifolds."""

from .core import (
    ComplexVal,
    CuspShape,
    DataError,
    DehnFillError,
    FillingClass,
    NumericError,
    NZCoefficients,
    UnimodularMap,
    canonicalize,
    euclid_complement,
)

__version__ = "0.1.0"

__all__ = [
    "ComplexVal",
    "CuspShape",
    "DataError",
    "DehnFillError",
    "FillingClass",
    "NumericError",
    "NZCoefficients",
    "UnimodularMap",
    "canonicalize",
    "euclid_complement",
]

"""finslerlab: anisotropic norm calculus, distance transforms, Hardy functionals."""

from .norms import (
    DiagQuadratic,
    Euclidean,
    NormEngine,
    PNorm,
    Quadratic,
    ZeroVectorError,
)

__all__ = [
    "DiagQuadratic",
    "Euclidean",
    "NormEngine",
    "PNorm",
    "Quadratic",
    "ZeroVectorError",
]

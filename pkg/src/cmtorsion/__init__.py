"""Cappell-Miller torsion of finite-dimensional Z2-graded bi-graded complexes."""
from .bicomplex import BiComplex, laplacian, spectral_truncate, split, validate
from .errors import CMTorsionError
from .torsion import (
    RefBases,
    TorsionValue,
    agmon_log_det,
    default_bases,
    torsion_acyclic,
    torsion_definition,
    torsion_truncated,
)

__version__ = "0.1.0"

__all__ = [
    "BiComplex",
    "CMTorsionError",
    "RefBases",
    "TorsionValue",
    "agmon_log_det",
    "default_bases",
    "laplacian",
    "spectral_truncate",
    "split",
    "torsion_acyclic",
    "torsion_definition",
    "torsion_truncated",
    "validate",
]

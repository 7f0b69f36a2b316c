"""Numerical Hecke-kernel lattice series, their analytic continuation,
and end-to-end identity checkers."""

__version__ = "0.1.0"

from .errors import (
    AmbiguousNormalization,
    HeckeKernelError,
    NearDiagonal,
    NotConverged,
    NotInvertible,
    PoleAt,
    PrecisionLoss,
    QuadratureNotConverged,
    TailTooLarge,
    Underflow,
    UsageError,
)
from .types import (
    CheckReport,
    EvalResult,
    FourierAssemblyConfig,
    IntMatrix2,
    KloostermanParams,
    PhiArgs,
    TruncationPolicy,
)

__all__ = [
    "AmbiguousNormalization",
    "CheckReport",
    "EvalResult",
    "FourierAssemblyConfig",
    "HeckeKernelError",
    "IntMatrix2",
    "KloostermanParams",
    "NearDiagonal",
    "NotConverged",
    "NotInvertible",
    "PhiArgs",
    "PoleAt",
    "PrecisionLoss",
    "QuadratureNotConverged",
    "TailTooLarge",
    "TruncationPolicy",
    "Underflow",
    "UsageError",
]

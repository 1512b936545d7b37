"""Spectra of invertible weighted composition operators on the unit ball.

Operators ``C f = psi * (f o phi)`` act on the Hardy space (gamma = 1) and the
weighted Bergman spaces of the ball in C^N, with ``phi`` an automorphism.
"""

__version__ = "0.1.0"

from .automorphism import (
    Automorphism,
    FixedPointReport,
    Kind,
    canonical_hyperbolic,
    classify,
    from_involution,
    from_matrix,
    hyperbolic_normal_form,
    parabolic_from_siegel,
    parabolic_siegel_form,
    parabolic_translation,
    rotation,
)
from .constructions import (
    EigenWitness,
    adjoint_eigenvector,
    circular_intertwiner,
    forward_eigenfunction,
    parabolic_approx_eigenvector,
)
from .errors import (
    AmbiguousClassification,
    ConfigError,
    DomainError,
    EigensolverError,
    NotInvertible,
    SearchError,
    TruncationError,
    UnsupportedCase,
    WCOError,
)
from .operator import TruncatedOperator, build_matrix, compose_wco, eigenvalues, inverse_wco
from .series import TruncatedSeries
from .space import SpaceParams
from .spectrum import SpectrumPrediction, classify_point, predict
from .symbol import Symbol, cocycle, cocycle_sup_growth, is_invertible

__all__ = [
    "AmbiguousClassification",
    "Automorphism",
    "ConfigError",
    "DomainError",
    "EigenWitness",
    "EigensolverError",
    "FixedPointReport",
    "Kind",
    "NotInvertible",
    "SearchError",
    "SpaceParams",
    "SpectrumPrediction",
    "Symbol",
    "TruncatedOperator",
    "TruncatedSeries",
    "TruncationError",
    "UnsupportedCase",
    "WCOError",
    "__version__",
    "adjoint_eigenvector",
    "build_matrix",
    "canonical_hyperbolic",
    "circular_intertwiner",
    "classify",
    "classify_point",
    "cocycle",
    "cocycle_sup_growth",
    "compose_wco",
    "eigenvalues",
    "forward_eigenfunction",
    "from_involution",
    "from_matrix",
    "hyperbolic_normal_form",
    "inverse_wco",
    "is_invertible",
    "parabolic_approx_eigenvector",
    "parabolic_from_siegel",
    "parabolic_siegel_form",
    "parabolic_translation",
    "predict",
    "rotation",
]

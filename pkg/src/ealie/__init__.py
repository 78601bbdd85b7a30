"""Exact-arithmetic toolkit for extended affine Lie theory.

The package builds reduced extended affine root systems from semilattice
data, realizes cores of extended affine Lie algebras as (twisted) multiloop
algebras over Laurent rings and quantum tori, constructs integral Chevalley
bases for those cores, and reduces the resulting integer structure tables
modulo a prime to study the associated adjoint groups over finite fields.

All arithmetic is exact: rationals, cyclotomic fields and finite fields.
Floating point is never used.
"""

from ealie.errors import (
    BadCosets,
    CharTooSmall,
    DenominatorDivisibleByP,
    DividedPowerNonIntegral,
    DomainMismatch,
    DuplicateCoset,
    EpsilonInvalid,
    HypothesisFailed,
    InteractionViolated,
    IsotropicMirror,
    LatticeRequired,
    MissingDecomposition,
    NilpotencyCapExceeded,
    NonCommuting,
    NonIntegral,
    NonSquareObstruction,
    NotAffine,
    NotClosed,
    NotGenerating,
    NotLieTorus,
    OrderMismatch,
    OutOfFragment,
    PairInvalid,
    RankDeficient,
    RankOne,
    SigmaConditionsViolated,
    TauIncompatible,
    UnknownName,
    UnsupportedType,
)

__version__ = "0.1.0"

__all__ = [
    "BadCosets",
    "CharTooSmall",
    "DenominatorDivisibleByP",
    "DividedPowerNonIntegral",
    "DomainMismatch",
    "DuplicateCoset",
    "EpsilonInvalid",
    "HypothesisFailed",
    "InteractionViolated",
    "IsotropicMirror",
    "LatticeRequired",
    "MissingDecomposition",
    "NilpotencyCapExceeded",
    "NonCommuting",
    "NonIntegral",
    "NonSquareObstruction",
    "NotAffine",
    "NotClosed",
    "NotGenerating",
    "NotLieTorus",
    "OrderMismatch",
    "OutOfFragment",
    "PairInvalid",
    "RankDeficient",
    "RankOne",
    "SigmaConditionsViolated",
    "TauIncompatible",
    "UnknownName",
    "UnsupportedType",
    "__version__",
]

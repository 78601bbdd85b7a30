"""Error taxonomy shared across the toolkit.

Every failure mode that a caller can provoke with bad (but well-typed) input
gets its own exception class so that tests and the command line can assert
on the exact cause rather than on message text.
"""


class EalieError(Exception):
    """Base class for all toolkit errors."""


# scalar domains


class DomainMismatch(EalieError):
    """Two scalars (or an element and a scalar) live in different domains.

    Promotion between domains is never implicit; callers promote with
    ``Domain.coerce`` or ``promote`` before mixing.
    """


class DenominatorDivisibleByP(EalieError):
    """A rational cannot be reduced mod p because p divides its denominator."""


class NonSquareObstruction(EalieError):
    """A required square root does not exist in the working scalar domain."""


# root systems and semilattices


class UnsupportedType(EalieError):
    """The requested finite type is outside the supported catalogue."""


class NotClosed(EalieError):
    """A coset set fails closure under s + 2s' within the ambient lattice."""


class NotGenerating(EalieError):
    """A semilattice does not span the full ambient lattice."""


class DuplicateCoset(EalieError):
    """Coset representatives repeat modulo twice the lattice."""


class InteractionViolated(EalieError):
    """The pair (S, L) fails the required S+kL/L+S interaction laws."""


class LatticeRequired(EalieError):
    """The finite type forces this semilattice to be a full lattice."""


class IsotropicMirror(EalieError):
    """Reflection in an isotropic root was requested."""


class MissingDecomposition(EalieError):
    """No compatible (S1, S2) decomposition exists for this (S, L) pair."""


class RankOne(EalieError):
    """Rank-one root systems are outside the supported range."""


class NotAffine(EalieError):
    """The requested operation needs nullity exactly one."""


# Lie algebra construction


class NilpotencyCapExceeded(EalieError):
    """exp(ad x) did not terminate within the nilpotency cap."""


class OrderMismatch(EalieError):
    """An automorphism does not have its declared finite order."""


class SigmaConditionsViolated(EalieError):
    """An automorphism fails the loop-construction admissibility checks."""


class PairInvalid(EalieError):
    """A would-be Chevalley pair fails one of its defining identities."""


class UnknownName(EalieError):
    """A named catalogue entry or realization does not exist."""


class NonCommuting(EalieError):
    """Automorphisms that must commute do not."""


class HypothesisFailed(EalieError):
    """A multiloop induction hypothesis fails at some stage."""


class BadCosets(EalieError):
    """Coset data handed to a concrete realization is inconsistent."""


class TauIncompatible(EalieError):
    """The supplied automorphism is not a Chevalley automorphism here."""


class RankDeficient(EalieError):
    """A candidate set fails to span the space it must span."""


class NotLieTorus(EalieError):
    """Root spaces fail the one-dimensionality the construction needs."""


# integral structure


class NonIntegral(EalieError):
    """A structure constant that must be an integer is not."""


class EpsilonInvalid(EalieError):
    """A sign function fails the symmetry its use requires."""


# mod-p reduction and groups


class DividedPowerNonIntegral(EalieError):
    """A divided power of ad leaves the integral lattice."""


class OutOfFragment(EalieError):
    """A group word leads outside the tabulated window."""


class CharTooSmall(EalieError):
    """The field characteristic is below the threshold the theorem needs."""

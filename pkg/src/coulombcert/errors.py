"""Exception types shared across the package.

Certification code must fail loudly: invalid enclosures, domain violations
and singular linear algebra raise instead of propagating NaNs or silently
degrading a bound.
"""


class CoulombCertError(Exception):
    """Base class for all package errors."""


class DomainError(CoulombCertError):
    """An operation was evaluated outside its mathematical domain
    (division by an interval containing zero, sqrt of a negative
    interval, a configuration with colliding charges, ...)."""


class ShapeError(CoulombCertError):
    """Dimension mismatch between interval operands."""


class SymmetryError(CoulombCertError):
    """A configuration or direction does not satisfy the reflection
    symmetry of the requested family."""


class NumericsError(CoulombCertError):
    """Non-rigorous numerical helper failed (singular matrix, eigensolver
    breakdown)."""


class StepRejected(CoulombCertError):
    """Corrector did not converge; the caller should retry with a smaller
    arclength step."""


class CollisionProximity(CoulombCertError):
    """Continuation reached a configuration close to a collision."""


class BifurcationDetected(CoulombCertError):
    """The branch Jacobian is rank deficient at the requested point."""


class EigValidationFailed(CoulombCertError):
    """Rigorous enclosure of an eigenpair could not be established."""


class PromotionFailed(CoulombCertError):
    """A certified eigenvalue disk could not be promoted to a purely
    imaginary frequency."""


class IntegrityError(CoulombCertError):
    """A stored branch file failed its re-audit."""

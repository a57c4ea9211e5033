"""Exception hierarchy.

``ValidationError`` subclasses signal bad input (CLI exit code 2);
``InternalInconsistency`` signals that two independent computations of the
same quantity disagree (CLI exit code 3).
"""

from __future__ import annotations


class DilationLabError(Exception):
    pass


class ValidationError(DilationLabError, ValueError):
    pass


class HermiticityError(ValidationError):
    def __init__(self, residual: float, message: str | None = None):
        self.residual = float(residual)
        super().__init__(message or f"matrix is not Hermitian (residual {self.residual:.3e})")


class NotPositiveDefinite(ValidationError):
    pass


class SingularMatrix(ValidationError):
    pass


class ExceptionalPoint(ValidationError):
    pass


class BrokenSymmetry(ValidationError):
    pass


class NotDiagonalizable(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class MetricMismatch(ValidationError):
    pass


class InvalidProbability(ValidationError):
    pass


class NonOrthonormalBasis(ValidationError):
    pass


class ConstraintViolated(ValidationError):
    pass


class InternalInconsistency(DilationLabError):
    pass

"""
Error types for the WPI toolkit
Every error knows the CLI exit code it maps to
"""

from typing import Any, Optional


class WpiWarning(UserWarning):
    """Numerical caveat that does not invalidate a result"""


class WpiError(Exception):
    """Base error. exit_code 1 means bad input, 2 means a certified bound failed."""

    exit_code = 1

    def __init__(self, message: str, witness: Optional[Any] = None):
        super().__init__(message)
        self.witness = witness


class InvalidInput(WpiError):
    pass


class InvalidCertificate(WpiError):
    pass


class InvalidKernel(WpiError):
    pass


class NumericalFailure(WpiError):
    pass


class DivergentIntegral(WpiError):
    pass


class NonVanishingGamma(WpiError):
    pass


class DomainError(WpiError):
    pass


class RangeError(DomainError):
    pass


class ShapeViolation(WpiError):
    pass


class AssumptionViolated(WpiError):
    pass


class DivergentB(WpiError):
    """B(v) is infinite; `bound` holds the sentinel."""

    def __init__(self, message: str, witness: Optional[Any] = None):
        super().__init__(message, witness)
        self.bound = float("inf")


class IncomparableSieves(WpiError):
    pass


class ZeroMassState(WpiError):
    pass


class NotReversible(WpiError):
    pass


class MassAtOne(WpiError):
    pass


class TooLarge(WpiError):
    pass


class ZeroConductance(WpiError):
    pass


class EmptyRestriction(WpiError):
    pass


class BracketViolation(WpiError):
    pass


class TruncationTooSmall(WpiError):
    pass


class BadSupport(WpiError):
    pass


class RegimeViolation(WpiError):
    pass


class Inconclusive(WpiError):
    pass


class MinorizationFails(WpiError):
    pass


class ZeroFunction(WpiError):
    pass


class BoundViolation(WpiError):
    exit_code = 2


class DriftViolated(BoundViolation):
    pass

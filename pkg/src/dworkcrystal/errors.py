"""Exception types shared across the package.

Every error carries a structured payload (``details``) so that the command
line layer can serialize it without parsing messages.
"""

from __future__ import annotations


class CrystalError(Exception):
    """Base class for all package errors."""

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details

    def payload(self) -> dict:
        out = {"error": type(self).__name__, "message": str(self)}
        out.update({k: v for k, v in self.details.items()})
        return out


class ConfigurationError(CrystalError, ValueError):
    """Inconsistent or unsupported inputs (mismatched moduli, bad dimensions, p = 2 ...)."""


class NotAUnit(CrystalError, ArithmeticError):
    """Inversion of an element that is not a unit; ``valuation`` is attached."""

    def __init__(self, message: str, valuation: int | None = None, **details):
        super().__init__(message, valuation=valuation, **details)
        self.valuation = valuation


class NotInvertibleModP(CrystalError, ArithmeticError):
    """A matrix whose reduction mod p is singular; ``rank`` is the rank over F_p."""

    def __init__(self, message: str, rank: int | None = None, **details):
        super().__init__(message, rank=rank, **details)
        self.rank = rank


class PrecisionShortfall(CrystalError, ArithmeticError):
    """The requested truncation cannot certify the requested precision."""


class InvalidRegion(CrystalError, ValueError):
    """A proposed region is not open in the face topology, or is malformed."""


class PreconditionFailed(CrystalError, ValueError):
    """A mathematical hypothesis of a verifier does not hold for the input."""

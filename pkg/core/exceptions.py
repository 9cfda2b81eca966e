"""Custom exceptions for the fibration certifier."""
from typing import Optional, Sequence


class FibrationCertifierError(Exception):
    """Base exception for the fibration certifier."""
    pass


class ConfigurationError(FibrationCertifierError):
    """Raised when configuration is invalid."""
    pass


class RingError(FibrationCertifierError):
    """Raised when a value leaves the localized ring or a non-unit is inverted."""
    pass


class FormError(FibrationCertifierError):
    """Raised when a bilinear form or vector violates a precondition."""
    pass


class SearchExhaustedError(FormError):
    """Raised when a bounded search finds nothing within its bound."""

    def __init__(self, message: str, bound: int, transcript: Optional[Sequence[str]] = None):
        super().__init__(f"{message} (bound {bound})")
        self.bound = bound
        self.transcript = list(transcript or [])


class TensorError(FibrationCertifierError):
    """Raised for mismatched bases, inhomogeneous input or wrong parity."""
    pass


class SeriesError(FibrationCertifierError):
    """Raised when a power series does not come from a product formula."""
    pass


class OracleBoundError(FibrationCertifierError):
    """Raised when a brute-force rank computation exceeds its configured bound."""
    pass


class TableError(FibrationCertifierError):
    """Raised when a homotopy table is missing, corrupted or inconsistent."""
    pass


class NoApplicableRuleError(FibrationCertifierError):
    """Raised when normalization meets a subterm the table does not cover."""

    def __init__(self, message: str, subterm: str = ""):
        super().__init__(f"{message}: {subterm}" if subterm else message)
        self.subterm = subterm


class BasisMismatchError(FibrationCertifierError):
    """Raised when vectors from different Hilton bases are combined."""
    pass


class ProblemInputError(FibrationCertifierError):
    """Raised when a problem file fails validation."""

    def __init__(self, message: str, fields: Optional[Sequence[str]] = None):
        super().__init__(message)
        self.fields = list(fields or [])


class ConstructionError(FibrationCertifierError):
    """Raised when no construction is found for a valid problem."""

    def __init__(self, message: str, transcript: Optional[Sequence[str]] = None):
        super().__init__(message)
        self.transcript = list(transcript or [])


class DataError(FibrationCertifierError):
    """Raised when a state that the theory rules out is reached."""
    pass


class CertificateError(FibrationCertifierError):
    """Raised when a certificate fails re-verification."""
    pass

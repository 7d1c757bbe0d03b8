"""Shared exception types.

Exit-code mapping for the CLI lives in weylinv.cli; library code raises these
and never calls sys.exit.
"""
from __future__ import annotations

__all__ = [
    "WeylinvError",
    "UnsupportedSystemError",
    "RankMismatchError",
    "IsotropicRootError",
    "ContextMismatchError",
    "CapExceededError",
    "CacheFormatError",
    "CosetValidationError",
    "CertificateError",
    "NormalizerError",
    "UnsupportedEmbeddingError",
]


class WeylinvError(Exception):
    """Base class for all weylinv errors."""


class UnsupportedSystemError(WeylinvError, ValueError):
    """Requested (type, rank) outside the supported table."""


class RankMismatchError(WeylinvError, ValueError):
    """Vectors of different ambient dimension combined."""


class IsotropicRootError(WeylinvError, ValueError):
    """Reflection requested at a vector of squared norm zero."""


class ContextMismatchError(WeylinvError, ValueError):
    """Algebra elements with different coordinate labels combined."""


class CapExceededError(WeylinvError, RuntimeError):
    """An enumeration hit its configured element or frame cap."""

    def __init__(self, message: str, cap: int):
        super().__init__(message)
        self.cap = cap


class CacheFormatError(WeylinvError, ValueError):
    """A cache file has an unknown format_version or inconsistent content."""


class CosetValidationError(WeylinvError, RuntimeError):
    """The coset-space order identity |orbit| * |U| = |W| failed.

    This means the frame-restriction key is not faithful for the
    requested subgroup (two cosets restrict identically), so the keyed
    orbit undercounts the cosets and a different enumeration method
    would be required.
    """


class CertificateError(WeylinvError, RuntimeError):
    """A fold certificate failed on some orbit (a legal outcome)."""


class NormalizerError(WeylinvError, ValueError):
    """Group element does not map the frame's root lines to themselves."""


class UnsupportedEmbeddingError(WeylinvError, ValueError):
    """A diagonalized norm has odd square-free part != 1 and cannot be
    expressed with 2-power-by-coordinate diagonal entries."""

"""Exception types raised across the package."""

from __future__ import annotations


class KpaacError(Exception):
    """Base class for all package errors."""


class ModelTooLarge(KpaacError, ValueError):
    """The requested (m, k) model does not fit the representable bounds."""


class BadContainer(KpaacError, ValueError):
    """A container header or layout is malformed."""


class CorruptPayload(KpaacError, ValueError):
    """Payload bits do not decode to a consistent chain."""


class PGMError(KpaacError, ValueError):
    """Malformed or truncated PGM data."""


class UnsupportedDepth(PGMError):
    """PGM maxval above 255."""

"""Exception types shared across the package."""

from __future__ import annotations


class PdspError(Exception):
    """Base class for all package errors."""


class EmbeddingError(PdspError):
    """Rotation system is inconsistent or fails the Euler check."""


class SideNotConnected(PdspError):
    pass


class Disconnected(PdspError):
    pass


class CyclesCross(PdspError):
    pass


class NotShortestReplacement(PdspError):
    pass


class NotSplitting(PdspError):
    pass


class NoneExists(PdspError):
    """No dag-cut or dag-ring exists for the requested partition."""


class NoExtension(PdspError):
    pass


class NoCompatible(PdspError):
    """A candidate mapping admits no compact labelling."""


class NotEmptyHandle(PdspError):
    pass


class LimitExceeded(PdspError):
    """An oracle cap (vertices or search nodes) was hit."""


class InvariantViolation(PdspError):
    """An internal consistency check failed. The CLI maps this to exit code 2."""


class FormatError(PdspError):
    """Malformed instance or solution document."""

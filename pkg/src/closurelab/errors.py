"""Shared exception types."""


class ValidationError(ValueError):
    """Malformed instance data, bad parameters, or a violated precondition."""


class ResourceLimitError(RuntimeError):
    """An enumeration or iteration cap was exceeded; never a silent truncation."""


class EmptyHullError(RuntimeError):
    """A single-row integer hull contains no lattice point."""


class AmbiguousRoundingError(RuntimeError):
    """A rational enclosure was too wide to determine an exact ceiling."""

from __future__ import annotations


class WnuError(Exception):
    """Base class for errors raised by this package."""


class InputError(WnuError, ValueError):
    """Malformed input: bad file, unknown name, out-of-range coordinate."""


class ConstructionError(WnuError):
    """A construction invariant failed (ill-defined table, non-unique homomorphism, ...)."""

"""Exception types shared across modules."""

import os

DEFAULT_ENUM_CAP = 24


class EnumerationCapExceeded(RuntimeError):
    """An exhaustive enumeration would exceed its configured size cap."""


class NumericalInconsistencyError(ArithmeticError):
    """A quantity that must be non-negative came out clearly negative."""


def enum_cap() -> int:
    """Enumeration cap, overridable with the HODNET_ENUM_CAP environment variable."""
    raw = os.environ.get("HODNET_ENUM_CAP")
    if raw is None:
        return DEFAULT_ENUM_CAP
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"HODNET_ENUM_CAP must be an integer, got {raw!r}") from exc

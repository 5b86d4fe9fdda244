"""Error types shared across the package.

Plain ValueError is used for invalid arguments; the classes here cover the
remaining failure kinds that callers may want to catch separately.
"""


class ResourceLimitError(RuntimeError):
    """Requested system size exceeds what the exact engine is allowed to handle."""


class ZeroProbabilityError(ValueError):
    """A measurement outcome with (numerically) zero probability was requested."""


class InternalConsistencyError(RuntimeError):
    """A convention cross-check failed; results would not be trustworthy."""

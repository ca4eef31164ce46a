"""Exception types shared across the package.

Plain ``ValueError`` is used for invalid arguments; the classes here mark
failure modes that callers are expected to branch on (CLI exit codes,
scheduler fallbacks).
"""


class CalibrationError(RuntimeError):
    """A pulse primitive could not be calibrated to its target fidelity."""


class CompileError(RuntimeError):
    """A compiled schedule failed its simulation check before emission."""


class NoRouteError(RuntimeError):
    """No fault-avoiding block path exists between the endpoints."""


class SeparationError(RuntimeError):
    """No start-offset assignment satisfies the packet separation rule."""


class UnsupportedInputError(ValueError):
    """The requested input/output site has no exact pulse protocol."""

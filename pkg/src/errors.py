"""
Exception hierarchy for the hermitian forms toolkit.

Every error raised on purpose by the library derives from HermqError, so the
command-line front end can map it to an exit status without guessing.
"""


class HermqError(Exception):
    """Base class for all library errors"""

    exit_status = 1


class ValidationError(HermqError, ValueError):
    """Malformed input data or a violated type invariant"""

    exit_status = 2


class UnsupportedError(HermqError, ValueError):
    """Ring / flavor / mode combination outside the supported scope"""

    exit_status = 2


class CapExceededError(HermqError):
    """A rank, step or search cap was exceeded"""

    exit_status = 3


class ObstructionError(HermqError):
    """A surgery obstruction class is nonzero (linear system unsolvable)"""

    exit_status = 3


class ConventionError(HermqError):
    """An internal sign or convention assertion failed"""

    exit_status = 1

"""
Error hierarchy. Every error carries the process exit code the CLI uses for it,
the way an HTTP error carries its status code.
"""


class TensorBoundsError(Exception):
    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class PreconditionError(TensorBoundsError):
    """A hypothesis of the requested bound or set does not hold."""
    exit_code = 2


class TensorParseError(TensorBoundsError):
    exit_code = 3


class ResourceCapError(TensorBoundsError):
    """Dense, entry-count or circuit cap exceeded."""
    exit_code = 4


class ConvergenceError(TensorBoundsError):
    exit_code = 5


class InvariantError(TensorBoundsError):
    """A computed quantity broke an identity that holds for every valid input."""
    exit_code = 6

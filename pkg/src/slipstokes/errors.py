"""Error types shared across the package.

Every failure mode that callers are expected to handle gets its own class,
so tests and the command line driver can map outcomes to exit codes without
string matching.
"""


class SlipStokesError(Exception):
    """Base class for all package errors."""


class InvalidArgument(SlipStokesError, ValueError):
    """An argument violates a documented precondition."""


class ParseError(SlipStokesError, ValueError):
    """A file could not be parsed.  Carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(SlipStokesError, ArithmeticError):
    """Non-finite values or an unacceptable residual in a numerical kernel."""


class SingularSystem(SlipStokesError, RuntimeError):
    """A linear system is singular to working precision."""


class MaxIterations(SlipStokesError, RuntimeError):
    """An iteration failed to converge within its budget."""


class IncompatibleData(SlipStokesError, RuntimeError):
    """Problem data violates the rotational compatibility condition."""


class DuplicateRun(SlipStokesError, RuntimeError):
    """A run id already exists with different artifact bytes."""


class VersionMismatch(SlipStokesError, RuntimeError):
    """A stored artifact was written by an unsupported format version."""

"""Exception types shared across the package."""


class GreenBVPError(Exception):
    """Base class for all package errors."""


class DomainError(GreenBVPError, ValueError):
    """An argument lies outside the domain of an operation."""


class ShapeError(GreenBVPError, ValueError):
    """Array or matrix dimensions are incompatible."""


class AlignmentError(GreenBVPError, ValueError):
    """Polynomials expanded about different centers were combined."""


class ModeError(GreenBVPError, ValueError):
    """Rigorous and fast-float values were mixed in one computation."""


class ConfigError(GreenBVPError, ValueError):
    """Unknown problem name or invalid run configuration."""


class SolveError(GreenBVPError, RuntimeError):
    """The non-rigorous solver failed (singular system, no convergence)."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class StateError(GreenBVPError, RuntimeError):
    """An operation was called on an object in the wrong state."""


class FormatError(GreenBVPError, ValueError):
    """A solution file does not conform to the schema."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class UnderflowDiagnostic(GreenBVPError, ArithmeticError):
    """Node data has lost relative accuracy to subnormal underflow.

    Raised when fundamental-solution data or Green's-function factors
    contain nonzero entries below the subnormal threshold. Decaying modes
    of the fundamental solution can no longer cancel the growing ones, so
    no meaningful certificate can be produced.
    """

    def __init__(self, message, where="", count=0, smallest=0.0):
        super().__init__(message)
        self.where = where
        self.count = count
        self.smallest = smallest

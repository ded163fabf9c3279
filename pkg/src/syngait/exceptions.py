"""Exception and warning classes raised by syngait.

The class names double as the machine-readable error codes emitted by the CLI.
"""


class SynGaitError(Exception):
    """Base class for all domain errors."""


class AntipodalInput(SynGaitError, ValueError):
    """Logarithm requested at (or numerically at) the antipode of the identity."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NormViolation(SynGaitError, ValueError):
    """A quaternion norm deviates from 1 by more than the accepted tolerance."""


class NoConvergence(SynGaitError, RuntimeError):
    """Iterative Fréchet mean did not converge."""


class GridTooShort(SynGaitError, ValueError):
    pass


class GridMismatch(SynGaitError, ValueError):
    pass


class TangentOverflow(SynGaitError, ValueError):
    """A reconstructed tangent value left the injectivity radius of exp."""


class InvalidConfig(SynGaitError, ValueError):
    pass


class EmptyGrid(SynGaitError, ValueError):
    pass


class SingularCorrelation(SynGaitError, ValueError):
    pass


class InvalidK(SynGaitError, ValueError):
    pass


class SizeMismatch(SynGaitError, ValueError):
    pass


class ShapeMismatch(SynGaitError, ValueError):
    pass


class ExactTooLarge(SynGaitError, ValueError):
    pass


class ZeroNorm(SynGaitError, ValueError):
    pass


class ParseError(SynGaitError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DegenerateSample(UserWarning):
    """All curves are identical; every eigenvalue and score is zero."""


class IoError(SynGaitError, OSError):
    pass

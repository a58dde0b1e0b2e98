"""Domain errors.

Every error raised by the laboratory derives from :class:`LabError`, itself a ``ValueError``, and carries the
process exit code the command line maps it to.
"""

from typing import Optional


class LabError(ValueError):
    """Base class for all laboratory errors."""

    exit_code: int = 2


class ConfigError(LabError):
    """A configuration or usage problem detected before any computation starts."""


class UnsupportedDimensionError(LabError):
    """The ambient dimension is below the supported minimum."""


class InvalidWidthError(LabError):
    """The hidden width is odd or too small for the antisymmetric pairing."""


class DimensionMismatchError(LabError):
    """Two objects that must share a dimension do not."""


class LabelBoundError(LabError):
    """Labels could exceed 1 in absolute value."""


class KernelDomainError(LabError):
    """A kernel argument lies outside [-1, 1] beyond the clamping tolerance."""


class ScaleError(LabError):
    """A desk-scale cap was exceeded."""


class InvalidEigenvalueError(LabError):
    """The cutoff eigenvalue exceeds the top NTK eigenvalue 1/(4d)."""


class SeriesConvergenceError(LabError):
    exit_code = 1


class QuadratureError(LabError):
    exit_code = 1


class NumericalError(LabError):
    """Non-finite values reached a solver."""

    exit_code = 1


class DivergenceError(LabError):
    """Weights became non-finite during an Euler step."""

    exit_code = 3

    def __init__(self, message: str, step: Optional[int] = None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class CodecError(LabError):
    """A file does not follow the expected layout."""


class PlanInfeasibleError(LabError):
    """The regression function keeps more than epsilon/4 of its mass beyond the tabulated spectrum."""

    exit_code = 4


VERDICT_FAILURE: int = 1
SUCCESS: int = 0


def exit_code_for(exc: BaseException) -> int:
    """Maps an exception raised below the entrypoint layer to a process exit code."""
    if isinstance(exc, LabError):
        return exc.exit_code
    # pydantic.ValidationError and plain ValueErrors come from config parsing.
    if isinstance(exc, (ValueError, OSError)):
        return 2
    return VERDICT_FAILURE

"""core/errors.py — Exception hierarchy shared by the library and the CLI.

Every error carries the process exit code the CLI maps it to:
    2  configuration / invalid argument
    3  experiment degeneracy
    4  I/O (dataset ingestion, result writing)
    1  internal invariant violation

The standard-library bases (ValueError, ArithmeticError, OSError, ...) are
kept so callers that only know the builtin families still catch them.
"""

from __future__ import annotations


class BootstrapLabError(Exception):
    """Root of every error raised by this project."""

    exit_code: int = 1


# ---------------------------------------------------------------------------
# Configuration / argument errors (exit 2)
# ---------------------------------------------------------------------------

class InvalidArgumentError(BootstrapLabError, ValueError):
    """An argument is outside the operation's precondition."""

    exit_code = 2


class DomainError(InvalidArgumentError):
    """A probability (or similar) lies outside the function's domain."""


class ConfigurationError(InvalidArgumentError):
    """An experiment configuration is invalid or internally inconsistent.

    `field` names the violated key when one can be singled out.
    """

    def __init__(self, message: str, field: str | None = None) -> None:
        super().__init__(message)
        self.field = field


class InfeasibleQuantileError(ConfigurationError):
    """l = floor(alpha * (B + 1)) falls outside 1..B."""

    def __init__(self, alpha: float, B: int, minimal_B: int | None) -> None:
        hint = f"; need B >= {minimal_B}" if minimal_B is not None else ""
        super().__init__(
            f"infeasible bootstrap quantile for alpha={alpha}, B={B}{hint}",
            field="B",
        )
        self.alpha = alpha
        self.B = B
        self.minimal_B = minimal_B


class UnsupportedModeError(ConfigurationError):
    """The requested paradigm / statistic / generator combination is not defined."""


# ---------------------------------------------------------------------------
# Degeneracy (exit 3)
# ---------------------------------------------------------------------------

class DegenerateError(BootstrapLabError, ArithmeticError):
    """A statistic is undefined for the given input."""

    exit_code = 3


class DegenerateSampleError(DegenerateError):
    """S_n = 0 (constant or one-point sample)."""


class DegenerateWeightsError(DegenerateError):
    """m_n = 0 or V_n^2 = 0 (weights carry no centred signal)."""


class DegenerateBootstrapSampleError(DegenerateError):
    """S*^2 = 0 (every bootstrap draw landed on one value)."""


class ExperimentError(DegenerateError):
    """A study could not produce any non-degenerate replicate."""


# ---------------------------------------------------------------------------
# I/O (exit 4) and internal errors (exit 1)
# ---------------------------------------------------------------------------

class DatasetError(BootstrapLabError, OSError):
    """A user dataset could not be read or parsed."""

    exit_code = 4


class InvariantViolation(BootstrapLabError, RuntimeError):
    """An internal invariant failed; indicates a bug, not bad input."""

    exit_code = 1

"""
Exception hierarchy shared by every package.

Hard problems raise one of these; soft problems travel as ``flags`` on result
objects instead. The CLI turns any ``GibbsForecastError`` into a one-line JSON
payload on stderr and exits with ``exit_code``.
"""

from __future__ import annotations

from typing import Any, Dict, Sequence


class GibbsForecastError(Exception):
    """Base class; ``exit_code`` 2 means usage/data error."""

    exit_code: int = 2

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"error": type(self).__name__, "message": self.message}
        payload.update(self.context)
        return payload


# =============================================================================
# DATA
# =============================================================================


class DataError(GibbsForecastError):
    """Non-finite values, empty input, duplicate periods, unreadable files."""


class PeriodParseError(DataError):
    def __init__(self, value: str, line: int):
        super().__init__(f"line {line}: cannot parse period {value!r} (expected YYYYQn)", line=line, value=value)
        self.line = line


class GapError(DataError):
    def __init__(self, missing: Sequence[str]):
        listed = ", ".join(missing)
        super().__init__(f"non-contiguous periods, missing: {listed}", missing=list(missing))
        self.missing = list(missing)


class AlignmentError(DataError):
    """No quarter has all three source months of the climate indicator."""


class InsufficientHistoryError(DataError):
    """Not enough observations for the requested memory or regressor dimension."""


# =============================================================================
# DOMAIN / CONTRACTS
# =============================================================================


class DomainError(GibbsForecastError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ContractViolationError(GibbsForecastError, ValueError):
    """Generator specification breaks the contraction or boundedness contract."""


class PreconditionError(GibbsForecastError, ValueError):
    """Theorem hypotheses (e.g. on the sample size) are not met."""


class ConfigurationError(GibbsForecastError):
    """Invalid run configuration or experiment setup."""


# =============================================================================
# SAMPLING
# =============================================================================


class DegenerateWeightsError(GibbsForecastError):
    """All prior mass sits on points with infinite risk."""


class CoverageError(GibbsForecastError):
    """No importance draw landed inside the prior ball."""

    def __init__(self, radius: float, n_samples: int):
        super().__init__(
            f"no proposal draw inside the L1 ball of radius {radius:g} "
            f"(N={n_samples}); increase the proposal variance or recenter the proposal",
            radius=radius,
            n_samples=n_samples,
        )


# =============================================================================
# VERIFICATION
# =============================================================================


class VerificationFailure(GibbsForecastError):
    """At least one lab check returned FAIL."""

    exit_code = 1

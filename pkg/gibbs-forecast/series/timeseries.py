"""
Time series data model.

Periods are quarter labels ``YYYYQn`` and must be strictly increasing without
gaps. Values are an ``(n, p)`` float array, frozen after construction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from middleware.errors import DataError, GapError, PeriodParseError

QUARTER_PATTERN = re.compile(r"^(\d{4})Q([1-4])$")
GDP_COLUMNS: Tuple[str, str] = ("gdp_growth", "climate")

# relative slack when checking |x| <= bound_B against an analytic bound
_BOUND_RTOL = 1e-12


def parse_quarter(text: str, line: Optional[int] = None) -> pd.Period:
    """Parse ``YYYYQn`` strictly; anything else is rejected."""
    match = QUARTER_PATTERN.match(text.strip()) if isinstance(text, str) else None
    if match is None:
        raise PeriodParseError(str(text), line if line is not None else -1)
    return pd.Period(year=int(match.group(1)), quarter=int(match.group(2)), freq="Q-DEC")


def quarter_labels(start: str, count: int) -> List[str]:
    first = parse_quarter(start)
    return [str(p) for p in pd.period_range(start=first, periods=count, freq="Q-DEC")]


def missing_quarters(periods: Sequence[pd.Period]) -> List[str]:
    """Labels absent from the closed range spanned by ``periods`` (assumed sorted)."""
    if not periods:
        return []
    present = {p.ordinal for p in periods}
    full = pd.period_range(start=periods[0], end=periods[-1], freq="Q-DEC")
    return [str(p) for p in full if p.ordinal not in present]


@dataclass(frozen=True)
class GdpRow:
    period: str
    gdp_growth: float
    climate: float

    def __post_init__(self):
        parse_quarter(self.period)
        if not (np.isfinite(self.gdp_growth) and np.isfinite(self.climate)):
            raise DataError(f"{self.period}: non-finite value in GDP row", period=self.period)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Ordered quarterly observations X_1..X_n in R^p with an optional sup bound."""

    timestamps: Tuple[str, ...]
    values: np.ndarray
    columns: Tuple[str, ...] = ("value",)
    bound_B: Optional[float] = None
    bound_source: str = "supplied"
    _periods: Tuple[pd.Period, ...] = field(default=(), init=False, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2:
            raise DataError("values must be a sequence of vectors")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "timestamps", tuple(str(t) for t in self.timestamps))
        object.__setattr__(self, "columns", tuple(self.columns))

        n, p = values.shape
        if len(self.timestamps) != n:
            raise DataError(f"{len(self.timestamps)} periods for {n} observations")
        if len(self.columns) != p:
            raise DataError(f"{len(self.columns)} column names for dimension {p}")
        if not np.all(np.isfinite(values)):
            bad = int(np.argwhere(~np.isfinite(values))[0][0])
            raise DataError(f"{self.timestamps[bad]}: non-finite value", period=self.timestamps[bad])

        periods = tuple(parse_quarter(t, line=i + 1) for i, t in enumerate(self.timestamps))
        ordinals = np.array([p.ordinal for p in periods], dtype=np.int64)
        if n > 1 and np.any(np.diff(ordinals) <= 0):
            raise DataError("periods must be strictly increasing")
        if n > 1 and ordinals[-1] - ordinals[0] != n - 1:
            raise GapError(missing_quarters(periods))
        object.__setattr__(self, "_periods", periods)

        if self.bound_B is not None:
            if not self.bound_B > 0:
                raise DataError(f"bound_B must be positive, got {self.bound_B}")
            if n and float(np.max(np.abs(values))) > self.bound_B * (1 + _BOUND_RTOL):
                raise DataError(
                    f"observed sup-norm {np.max(np.abs(values)):g} exceeds bound_B={self.bound_B:g}",
                    bound_B=self.bound_B,
                )

    # -------------------------------------------------------------------------

    def __len__(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.timestamps == other.timestamps
            and self.columns == other.columns
            and self.bound_B == other.bound_B
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def n(self) -> int:
        return len(self)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def periods(self) -> Tuple[pd.Period, ...]:
        return self._periods

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if len(self) else 0.0

    @property
    def is_gdp(self) -> bool:
        return self.columns == GDP_COLUMNS

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def index_of(self, period: str) -> int:
        target = parse_quarter(period).ordinal
        offset = target - self._periods[0].ordinal if self._periods else -1
        if not 0 <= offset < len(self):
            raise DataError(f"period {period} is outside {self.timestamps[0]}..{self.timestamps[-1]}")
        return int(offset)

    def next_period(self) -> str:
        return str(self._periods[-1] + 1)

    def head(self, stop: int) -> "TimeSeries":
        """Observations ``0..stop-1``; the causal view used when fitting at ``stop-1``."""
        return TimeSeries(
            timestamps=self.timestamps[:stop],
            values=self.values[:stop],
            columns=self.columns,
            bound_B=self.bound_B,
            bound_source=self.bound_source,
        )

    def rows(self) -> Iterator[GdpRow]:
        if not self.is_gdp:
            raise DataError(f"series columns {self.columns} are not GDP-format {GDP_COLUMNS}")
        for period, (growth, climate) in zip(self.timestamps, self.values):
            yield GdpRow(period=period, gdp_growth=float(growth), climate=float(climate))

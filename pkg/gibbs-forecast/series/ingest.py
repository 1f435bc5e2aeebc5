"""
CSV ingestion and emission, plus monthly climate alignment.

Numbers are parsed by pandas' round-trip float parser and written with ``repr``
so that ``load_csv(write_csv(s)) == s`` holds bit for bit. Reported line numbers
are physical lines of the file: comment and blank lines count.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from middleware.errors import AlignmentError, DataError, GapError, PeriodParseError
from middleware.log import get_logger

from .timeseries import GDP_COLUMNS, TimeSeries, missing_quarters, parse_quarter

logger = get_logger(__name__)

MONTH_PATTERN = re.compile(r"^(\d{4})-(0[1-9]|1[0-2])$")


@dataclass(frozen=True)
class CsvSchema:
    """Maps logical column names to the headers found in the file."""

    period: str = "period"
    columns: Mapping[str, str] = field(default_factory=lambda: {name: name for name in GDP_COLUMNS})

    @classmethod
    def infer(cls, header: Sequence[str], period: str = "period") -> "CsvSchema":
        others = [h for h in header if h != period]
        if all(name in others for name in GDP_COLUMNS):
            return cls(period=period)
        return cls(period=period, columns={h: h for h in others})


# =============================================================================
# READ
# =============================================================================


@dataclass(frozen=True)
class CsvFrame:
    """Parsed data rows of a CSV plus the physical line of each row."""

    frame: pd.DataFrame
    lines: np.ndarray

    def numbers(self, header: str) -> np.ndarray:
        """Column ``header`` as float64; the first bad cell raises with its line."""
        column = self.frame[header]
        numeric = pd.api.types.is_numeric_dtype(column)
        values = (column if numeric else pd.to_numeric(column, errors="coerce")).to_numpy(dtype=np.float64)
        bad = ~np.isfinite(values)
        if bad.any():
            i = int(bad.argmax())
            line = int(self.lines[i])
            text = column.iloc[i]
            if numeric or pd.isna(text):
                raise DataError(f"line {line}: column {header!r} is missing or not finite", line=line, column=header)
            raise DataError(f"line {line}: column {header!r} is not a number: {text!r}", line=line, column=header)
        return values


def _read_frame(path: str, text_column: str) -> CsvFrame:
    """Read a CSV whose ``text_column`` holds labels and whose other columns hold numbers."""
    if not os.path.exists(path):
        raise DataError(f"file not found: {path}", path=str(path))
    with open(path, encoding="utf-8") as handle:
        head = handle.readlines()
    offset = 0
    while offset < len(head) and head[offset].startswith("#"):
        offset += 1
    if offset >= len(head) or not head[offset].strip():
        raise DataError(f"{path}: no rows", path=str(path))
    try:
        frame = pd.read_csv(
            path,
            skiprows=offset,
            dtype={text_column: str},
            skip_blank_lines=False,
            float_precision="round_trip",
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError as exc:
        raise DataError(f"{path}: no rows", path=str(path)) from exc
    frame.columns = [c.strip() for c in frame.columns]
    # header sits on line offset + 1; row i of the frame on line offset + 2 + i
    lines = offset + 2 + np.arange(len(frame))
    filled = ~frame.isna().all(axis=1).to_numpy()
    frame = frame.loc[filled].reset_index(drop=True)
    return CsvFrame(frame=frame, lines=lines[filled])


def load_csv(path: str, schema: Optional[CsvSchema] = None, bound_B: Optional[float] = None) -> TimeSeries:
    """
    Load a quarterly CSV (``period,<value columns>``) into a TimeSeries.

    Rows are sorted by period. When ``bound_B`` is not supplied it defaults to the
    empirical sup-norm, which theoretical bounds cannot rely on, so a warning is logged.
    """
    csv = _read_frame(path, (schema or CsvSchema()).period)
    frame = csv.frame
    schema = schema or CsvSchema.infer(list(frame.columns))
    required = [schema.period, *schema.columns.values()]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise DataError(f"{path}: missing columns {missing}", path=str(path), missing=missing)
    if frame.empty:
        raise DataError(f"{path}: no rows", path=str(path))

    periods = [parse_quarter(text, line=int(line)) for text, line in zip(frame[schema.period], csv.lines)]
    values = np.column_stack([csv.numbers(header) for header in schema.columns.values()])
    order = np.argsort([p.ordinal for p in periods], kind="stable")
    periods = [periods[i] for i in order]
    values = values[order]

    ordinals = [p.ordinal for p in periods]
    if len(set(ordinals)) != len(ordinals):
        dupes = sorted({str(p) for p in periods if ordinals.count(p.ordinal) > 1})
        raise DataError(f"{path}: duplicate periods {dupes}", path=str(path), duplicates=dupes)
    gaps = missing_quarters(periods)
    if gaps:
        raise GapError(gaps)

    source = "supplied"
    if bound_B is None:
        bound_B = float(np.max(np.abs(values)))
        source = "empirical"
        logger.warning(
            "bound_defaulted_to_empirical",
            path=str(path),
            bound_B=bound_B,
            note="theoretical bounds require a true almost-sure bound",
        )
    series = TimeSeries(
        timestamps=tuple(str(p) for p in periods),
        values=values,
        columns=tuple(schema.columns.keys()),
        bound_B=bound_B if bound_B > 0 else None,
        bound_source=source,
    )
    logger.info("csv_loaded", path=str(path), rows=len(series), bound_B=series.bound_B)
    return series


# =============================================================================
# WRITE
# =============================================================================


def write_csv(series: TimeSeries, path: str, header_comment: Optional[str] = None) -> str:
    """Write ``series`` in the ingestion format; floats use shortest round-trip text."""
    frame = pd.DataFrame({"period": list(series.timestamps)})
    for j, name in enumerate(series.columns):
        frame[name] = [repr(float(v)) for v in series.values[:, j]]
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        if header_comment:
            handle.write(f"# {header_comment}\n")
        frame.to_csv(handle, index=False, lineterminator="\n")
    return path


# =============================================================================
# MONTHLY CLIMATE
# =============================================================================


def _parse_month(text: str, line: int) -> pd.Period:
    match = MONTH_PATTERN.match(str(text).strip())
    if match is None:
        raise PeriodParseError(str(text), line)
    return pd.Period(year=int(match.group(1)), month=int(match.group(2)), freq="M")


def load_monthly_csv(path: str) -> List[Tuple[str, float]]:
    """Read a ``month,value`` file with months as ``YYYY-MM``."""
    csv = _read_frame(path, "month")
    frame = csv.frame
    missing = [c for c in ("month", "value") if c not in frame.columns]
    if missing:
        raise DataError(f"{path}: missing columns {missing}", path=str(path), missing=missing)
    if frame.empty:
        raise DataError(f"{path}: no rows", path=str(path))
    values = csv.numbers("value")
    months = [str(_parse_month(text, int(line))) for text, line in zip(frame["month"], csv.lines)]
    return list(zip(months, values.tolist()))


def align_climate(monthly: Sequence[Tuple[str, float]]) -> List[Tuple[str, float]]:
    """
    Quarterly climate indicator available when forecasting the next quarter.

    The value labelled with quarter q is the mean of month 3 of q and months 1 and 2
    of q+1. Quarters missing any of those source months are omitted.
    """
    by_month: Dict[int, float] = {}
    for i, (month, value) in enumerate(monthly):
        period = _parse_month(month, i + 1)
        value = float(value)
        if not np.isfinite(value):
            raise DataError(f"month {month}: non-finite climate value", month=str(month))
        if period.ordinal in by_month:
            raise DataError(f"month {month} appears twice", month=str(month))
        by_month[period.ordinal] = value
    if not by_month:
        raise AlignmentError("no monthly climate observations")

    first = pd.Period(ordinal=min(by_month), freq="M").asfreq("Q-DEC")
    last = pd.Period(ordinal=max(by_month), freq="M").asfreq("Q-DEC")
    aligned: List[Tuple[str, float]] = []
    for quarter in pd.period_range(start=first, end=last, freq="Q-DEC"):
        third = quarter.asfreq("M", how="end")
        sources = [third.ordinal, third.ordinal + 1, third.ordinal + 2]
        if all(s in by_month for s in sources):
            aligned.append((str(quarter), sum(by_month[s] for s in sources) / 3.0))
    if not aligned:
        raise AlignmentError("no quarter has all three source months (m3 of q, m1 and m2 of q+1)")
    return aligned


def merge_climate(series: TimeSeries, aligned: Sequence[Tuple[str, float]]) -> TimeSeries:
    """
    Replace the climate column by the aligned indicator on the common periods.

    A supplied bound is kept and must still hold. An empirical bound (or none) is
    recomputed from the merged values, with the same warning as ``load_csv``.
    """
    if not series.is_gdp:
        raise DataError("climate alignment needs a GDP-format series")
    lookup = dict(aligned)
    keep = [i for i, t in enumerate(series.timestamps) if t in lookup]
    if not keep:
        raise AlignmentError("aligned climate shares no period with the GDP series")
    values = series.values[keep].copy()
    values[:, GDP_COLUMNS.index("climate")] = [lookup[series.timestamps[i]] for i in keep]
    bound_B, source = series.bound_B, series.bound_source
    if bound_B is None or source == "empirical":
        sup = float(np.max(np.abs(values)))
        bound_B, source = (sup if sup > 0 else None), "empirical"
        logger.warning(
            "bound_defaulted_to_empirical",
            bound_B=bound_B,
            note="theoretical bounds require a true almost-sure bound",
        )
    return TimeSeries(
        timestamps=tuple(series.timestamps[i] for i in keep),
        values=values,
        columns=series.columns,
        bound_B=bound_B,
        bound_source=source,
    )

"""Evaluation of forecast records: coverage, point-error metrics and fan-chart bands."""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from losses import cumulative_online_loss
from middleware.errors import DataError

from .rolling import BacktestResult, ForecastRecord

# published figures for the French GDP backtest (1988Q1-2011Q3, forecasts from 2000Q1)
REFERENCE_COVERAGE = {0.05: 0.065, 0.25: 0.434, 0.5: 0.608, 0.75: 0.848, 0.95: 0.978}
REFERENCE_ERRORS = {"gibbs": (0.22360, 0.08033), "least_squares": (0.24174, 0.08178)}


def _realized(records: Iterable[ForecastRecord]) -> List[ForecastRecord]:
    scored = [r for r in records if r.has_realized]
    if not scored:
        raise DataError("no realized records to evaluate")
    return scored


def coverage_freq(records: Iterable[ForecastRecord]) -> float:
    """Fraction of realizations at or below the predicted quantile; the target is tau."""
    scored = _realized(records)
    below = sum(1 for r in scored if r.realized <= r.prediction)
    return below / len(scored)


@dataclass(frozen=True)
class ErrorMetrics:
    mae: float
    mse: float
    count: int


def error_metrics(records: Iterable[ForecastRecord]) -> ErrorMetrics:
    scored = _realized(records)
    errors = np.array([r.realized - r.prediction for r in scored])
    return ErrorMetrics(mae=float(np.mean(np.abs(errors))), mse=float(np.mean(errors * errors)), count=errors.size)


def coverage_table(records: Iterable[ForecastRecord]) -> List[Tuple[float, float]]:
    by_tau: Dict[float, List[ForecastRecord]] = {}
    for record in records:
        if record.has_realized:
            by_tau.setdefault(record.tau, []).append(record)
    return [(tau, coverage_freq(by_tau[tau])) for tau in sorted(by_tau)]


@dataclass(frozen=True)
class BandRow:
    period: str
    quantiles: Tuple[Tuple[float, float], ...]
    realized: Optional[float]
    rearranged: bool


def rearrange_bands(records: Sequence[ForecastRecord]) -> List[BandRow]:
    """
    Per-period quantile curves, sorted across tau so they never cross.

    Sorting the predictions of each period preserves or lowers every marginal
    pinball loss. The input records are left untouched.
    """
    periods: "OrderedDict[str, Dict[float, ForecastRecord]]" = OrderedDict()
    for record in records:
        periods.setdefault(record.period, {})[record.tau] = record
    taus = sorted({record.tau for record in records})
    rows = []
    for period, by_tau in periods.items():
        if sorted(by_tau) != taus:
            raise DataError(f"period {period} lacks some tau levels", period=period)
        raw = [by_tau[tau].prediction for tau in taus]
        ordered = sorted(raw)
        rows.append(
            BandRow(
                period=period,
                quantiles=tuple(zip(taus, ordered)),
                realized=by_tau[taus[0]].realized,
                rearranged=ordered != raw,
            )
        )
    return rows


def summarize(result: BacktestResult) -> Dict:
    """MAE/MSE of the median forecast and of the least-squares comparator, plus coverage per tau."""
    summary: Dict = {
        "start_period": result.start_period,
        "taus": list(result.taus),
        "lambda_grid": list(result.grid.values),
        "coverage": {},
        "cumulative_loss": {},
        "flags": {},
    }
    for tau in result.taus:
        scored = result.for_tau(tau)
        if not scored:
            continue
        summary["coverage"][f"{tau:g}"] = coverage_freq(scored)
        summary["cumulative_loss"][f"{tau:g}"] = cumulative_online_loss(tau, scored).total
        counts: Dict[str, int] = {}
        for record in scored:
            for flag in record.flags:
                counts[flag] = counts.get(flag, 0) + 1
        summary["flags"][f"{tau:g}"] = counts

    if 0.5 in result.taus and result.for_tau(0.5):
        median = error_metrics(result.for_tau(0.5))
        summary["gibbs"] = {"mae": median.mae, "mse": median.mse, "count": median.count}
    comparator = [r for r in result.comparator if r.has_realized]
    if comparator:
        ols = error_metrics(comparator)
        summary["least_squares"] = {"mae": ols.mae, "mse": ols.mse, "count": ols.count}
    return summary


def format_reproduction_table(summary: Dict) -> str:
    """Plain-text tables: estimator errors, then coverage frequency by tau."""
    lines = ["estimator        mean abs. pred. error   mean quad. pred. error   reference"]
    for name, label in (("gibbs", "gibbs (tau=0.5)"), ("least_squares", "least squares")):
        if name in summary:
            mae, mse = REFERENCE_ERRORS[name]
            lines.append(
                f"{label:<16} {summary[name]['mae']:>21.5f}   {summary[name]['mse']:>22.5f}   {mae:.5f} / {mse:.5f}"
            )
    lines.append("")
    lines.append("tau      frequency   reference")
    for tau, freq in summary.get("coverage", {}).items():
        reference = REFERENCE_COVERAGE.get(float(tau))
        shown = "-" if reference is None else f"{reference:.3f}"
        lines.append(f"{float(tau):<8.2f} {freq:>9.3f}   {shown}")
    return "\n".join(lines)

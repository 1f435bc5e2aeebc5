"""Rolling quantile forecasting with online lambda selection, and its evaluation."""

from .lambda_grid import LambdaChoice, LambdaGrid, select_lambda
from .metrics import (
    BandRow,
    ErrorMetrics,
    coverage_freq,
    coverage_table,
    error_metrics,
    format_reproduction_table,
    rearrange_bands,
    summarize,
)
from .rolling import BacktestResult, ForecastRecord, SamplerConfig, rolling_forecast

__all__ = [
    "LambdaChoice",
    "LambdaGrid",
    "select_lambda",
    "BandRow",
    "ErrorMetrics",
    "coverage_freq",
    "coverage_table",
    "error_metrics",
    "format_reproduction_table",
    "rearrange_bands",
    "summarize",
    "BacktestResult",
    "ForecastRecord",
    "SamplerConfig",
    "rolling_forecast",
]

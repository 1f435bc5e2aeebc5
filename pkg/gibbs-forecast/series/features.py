"""
Regressors for predictors that are linear in theta.

A feature map turns the last ``k`` observations into a regressor ``x`` so that the
prediction of the target coordinate at ``t`` is ``x_t @ theta``.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from middleware.errors import DataError, InsufficientHistoryError

from .timeseries import GDP_COLUMNS, TimeSeries


@dataclass(frozen=True, eq=False)
class FeatureVector:
    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64).copy()
        x.flags.writeable = False
        if x.ndim != 1 or x.size == 0 or x[0] != 1.0:
            raise DataError("feature vector must be 1-D and start with the intercept 1")
        if not np.all(np.isfinite(x)):
            raise DataError("feature vector has non-finite entries")
        object.__setattr__(self, "x", x)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FeatureVector) and np.array_equal(self.x, other.x)

    __hash__ = None  # type: ignore[assignment]


class FeatureMap(ABC):
    """Memory ``k``, regressor dimension ``dim`` and the coordinate being predicted."""

    k: int
    dim: int
    target_index: int = 0
    name: str = "features"

    @abstractmethod
    def _rows(self, values: np.ndarray, targets: np.ndarray) -> np.ndarray:
        """Regressors for each target index in ``targets`` (all >= k)."""

    @abstractmethod
    def lipschitz_budget(self, theta: np.ndarray, bound_B: float) -> float:
        """Sum of the Lipschitz coefficients a_j(theta) of f_theta in its lags."""

    def check(self, series: TimeSeries) -> None:
        if series.dim <= self.target_index:
            raise DataError(f"{self.name} needs coordinate {self.target_index}; series has dimension {series.dim}")

    def vector(self, series: TimeSeries, t: int) -> FeatureVector:
        """Regressor predicting observation ``t`` (zero-based); ``t == n`` is the next period."""
        self.check(series)
        if t < self.k:
            raise InsufficientHistoryError(f"t={t} needs {self.k} lags of history", t=t, k=self.k)
        if t > len(series):
            raise DataError(f"t={t} is beyond the next period of a series of length {len(series)}", t=t)
        return FeatureVector(self._rows(series.values, np.array([t]))[0])

    def design(self, series: TimeSeries, stop: int | None = None) -> Tuple[np.ndarray, np.ndarray]:
        """(X, y) over targets ``k..stop-1``: exactly ``stop - k`` rows."""
        self.check(series)
        stop = len(series) if stop is None else stop
        return self.design_values(series.values[:stop])

    def design_values(self, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Same as ``design`` on a raw ``(n, p)`` array, for Monte Carlo paths."""
        stop = values.shape[0]
        if stop <= self.k:
            raise InsufficientHistoryError(f"need more than k={self.k} observations, got {stop}", n=stop, k=self.k)
        targets = np.arange(self.k, stop)
        X = self._rows(values, targets)
        y = values[targets, self.target_index].astype(np.float64)
        return X, y


class GdpFeatures(FeatureMap):
    """(1, dGDP_{t-1}, I_{t-1}, (I_{t-1} - I_{t-2}) |I_{t-1} - I_{t-2}|) for predicting dGDP_t."""

    k = 2
    dim = 4
    target_index = 0
    name = "gdp"

    def check(self, series: TimeSeries) -> None:
        if series.dim != 2:
            raise DataError(f"GDP features need (gdp_growth, climate) columns, got {series.columns}")

    def _rows(self, values: np.ndarray, targets: np.ndarray) -> np.ndarray:
        growth = values[:, 0]
        climate = values[:, 1]
        lag1 = climate[targets - 1]
        diff = lag1 - climate[targets - 2]
        return np.column_stack([np.ones(targets.size), growth[targets - 1], lag1, diff * np.abs(diff)])

    def lipschitz_budget(self, theta: np.ndarray, bound_B: float) -> float:
        theta = np.asarray(theta, dtype=np.float64)
        # d/du of u|u| is 2|u| <= 4B on data bounded by B; it enters both lags
        return float(np.sqrt(2.0) * max(abs(theta[1]), abs(theta[2])) + 8.0 * bound_B * abs(theta[3]))


class AutoregressiveFeatures(FeatureMap):
    """(1, X_{t-1}, ..., X_{t-k}) on one coordinate: theta_0 + sum_j theta_j X_{t-j}."""

    name = "autoregressive"

    def __init__(self, k: int = 1, target_index: int = 0):
        if k < 1:
            raise DataError(f"memory k must be >= 1, got {k}")
        self.k = k
        self.dim = k + 1
        self.target_index = target_index

    def _rows(self, values: np.ndarray, targets: np.ndarray) -> np.ndarray:
        column = values[:, self.target_index]
        lags = [column[targets - j] for j in range(1, self.k + 1)]
        return np.column_stack([np.ones(targets.size), *lags])

    def lipschitz_budget(self, theta: np.ndarray, bound_B: float) -> float:
        return float(np.sum(np.abs(np.asarray(theta, dtype=np.float64)[1:])))


def build_features(series: TimeSeries, t: int) -> FeatureVector:
    """GDP regressor for zero-based index ``t`` (needs ``t >= 2``)."""
    if series.columns != GDP_COLUMNS:
        raise DataError(f"build_features needs GDP-format columns {GDP_COLUMNS}, got {series.columns}")
    return GdpFeatures().vector(series, t)


def default_features(series: TimeSeries) -> FeatureMap:
    """GDP regressors for GDP-format series, one autoregressive lag otherwise."""
    return GdpFeatures() if series.is_gdp else AutoregressiveFeatures(k=1)

"""
Pilot estimator centring the importance-sampling proposal.

Least squares on the features, then the intercept is shifted so that the
empirical tau-quantile of the residuals is zero. It approximates the
tau-quantile regression fit without an LP solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from losses import check_tau
from middleware.errors import InsufficientHistoryError
from middleware.log import get_logger
from series.features import FeatureMap
from series.timeseries import TimeSeries

from .priors import ParamVector

logger = get_logger(__name__)

RIDGE = 1e-6


@dataclass(frozen=True)
class PilotFit:
    theta: ParamVector
    tau: float
    shift: float
    ridge_fallback: bool = False

    @property
    def flags(self) -> Tuple[str, ...]:
        return ("ridge_fallback",) if self.ridge_fallback else ()


def fit_pilot(tau: float, X: np.ndarray, y: np.ndarray) -> PilotFit:
    tau = check_tau(tau)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    rows, dim = X.shape
    if rows <= dim:
        raise InsufficientHistoryError(
            f"pilot needs more design rows than parameters ({rows} <= {dim})", rows=rows, dim=dim
        )

    ridge = bool(np.linalg.matrix_rank(X) < dim)
    if ridge:
        theta = np.linalg.solve(X.T @ X + RIDGE * np.eye(dim), X.T @ y)
        logger.warning("pilot_ridge_fallback", rows=rows, dim=dim, ridge=RIDGE)
    else:
        theta, *_ = np.linalg.lstsq(X, y, rcond=None)

    shift = float(np.quantile(y - X @ theta, tau, method="inverted_cdf"))
    theta = theta.copy()
    theta[0] += shift
    return PilotFit(theta=ParamVector(theta), tau=tau, shift=shift, ridge_fallback=ridge)


def pilot_fit(tau: float, series: TimeSeries, features: FeatureMap, stop: Optional[int] = None) -> PilotFit:
    """Pilot on observations ``0..stop-1`` (the whole series by default)."""
    n = len(series) if stop is None else stop
    if n <= features.k + features.dim:
        raise InsufficientHistoryError(
            f"pilot needs n > k + d (n={n}, k={features.k}, d={features.dim})", n=n, k=features.k, d=features.dim
        )
    X, y = features.design(series, stop=n)
    return fit_pilot(tau, X, y)

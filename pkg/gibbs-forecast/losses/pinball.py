"""
Lipschitz losses l(x, x') = g(x - x') and the risks built from them.

For forecasting, losses are always applied as l(realized, prediction), so the
quantile loss charges tau per unit of under-prediction and its population
minimiser is the tau-quantile.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Literal, Optional

import numpy as np

from middleware.errors import DomainError, InsufficientHistoryError
from series.features import FeatureMap
from series.timeseries import TimeSeries

LossKind = Literal["quantile", "absolute", "squared_bounded"]

# cells of the (draws x observations) prediction block evaluated at once
BLOCK_CELLS = 2**22


def check_tau(tau: float) -> float:
    tau = float(tau)
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must lie in (0, 1), got {tau}", tau=tau)
    return tau


def quantile_loss(tau: float, x, y):
    """
    l_tau(x, y) = tau (x - y) if x - y > 0, else -(1 - tau)(x - y).

    Vectorised over ``x`` and ``y``. Pass the realized value as ``x`` and the
    prediction as ``y`` to score a tau-quantile forecast.
    """
    tau = check_tau(tau)
    u = np.subtract(x, y, dtype=np.float64)
    out = np.where(u > 0, tau * u, -(1.0 - tau) * u)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LossFn:
    kind: LossKind
    tau: Optional[float] = None
    range_bound: Optional[float] = None
    target_index: int = 0

    def __post_init__(self):
        if self.kind == "quantile":
            if self.tau is None:
                raise DomainError("quantile loss needs tau")
            check_tau(self.tau)
        elif self.kind == "squared_bounded":
            if self.range_bound is None or not self.range_bound > 0:
                raise DomainError("squared_bounded loss needs a positive range bound to define K")
        elif self.kind != "absolute":
            raise DomainError(f"unknown loss kind {self.kind!r}")

    @classmethod
    def quantile(cls, tau: float) -> "LossFn":
        return cls(kind="quantile", tau=tau)

    @classmethod
    def absolute(cls) -> "LossFn":
        return cls(kind="absolute")

    @classmethod
    def squared_bounded(cls, range_bound: float) -> "LossFn":
        return cls(kind="squared_bounded", range_bound=range_bound)

    @property
    def lipschitz_K(self) -> float:
        if self.kind == "quantile":
            return max(self.tau, 1.0 - self.tau)
        if self.kind == "absolute":
            return 1.0
        return 2.0 * self.range_bound

    def g(self, u):
        u = np.asarray(u, dtype=np.float64)
        if self.kind == "quantile":
            return np.where(u > 0, self.tau * u, -(1.0 - self.tau) * u)
        if self.kind == "absolute":
            return np.abs(u)
        return u * u

    def evaluate(self, prediction, realized):
        """g(realized - prediction), vectorised."""
        out = self.g(np.subtract(realized, prediction, dtype=np.float64))
        return float(out) if out.ndim == 0 else out


def empirical_risk(
    loss: LossFn,
    theta: np.ndarray,
    series: TimeSeries,
    features: FeatureMap,
    stop: Optional[int] = None,
) -> float:
    """r_n(theta) = mean over i = k..n-1 of l(X_hat_i, X_i): exactly n - k terms."""
    n = len(series) if stop is None else stop
    if n <= features.k:
        raise InsufficientHistoryError(f"empirical risk needs n > k (n={n}, k={features.k})", n=n, k=features.k)
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (features.dim,):
        raise DomainError(f"theta has shape {theta.shape}, features have dimension {features.dim}")
    if loss.target_index != features.target_index:
        raise DomainError(
            f"loss scores coordinate {loss.target_index}, features predict coordinate {features.target_index}"
        )
    X, y = features.design(series, stop=n)
    return float(np.mean(loss.evaluate(X @ theta, y)))


def risk_matrix(
    loss: LossFn,
    thetas: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    chunk: Optional[int] = None,
    workers: int = 1,
    reduction: Literal["mean", "sum"] = "mean",
) -> np.ndarray:
    """
    Empirical risk (or summed loss) of every row of ``thetas`` on design (X, y).

    ``chunk`` rows of ``thetas`` are scored at once (by default enough to fill
    ``BLOCK_CELLS`` predictions). Chunks are independent and written back by
    index, so the result is bit-identical whatever ``chunk`` and ``workers``.
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
    if X.shape[0] == 0:
        raise InsufficientHistoryError("empty design")
    if chunk is None:
        chunk = max(1, BLOCK_CELLS // X.shape[0])
    out = np.empty(thetas.shape[0])

    def _block(start: int) -> None:
        stop = min(start + chunk, thetas.shape[0])
        block = thetas[start:stop]
        # elementwise per coordinate: each entry is independent of the block shape
        preds = block[:, 0, None] * X[None, :, 0]
        for j in range(1, X.shape[1]):
            preds += block[:, j, None] * X[None, :, j]
        losses = loss.evaluate(preds, y[None, :])
        out[start:stop] = np.sum(losses, axis=1) if reduction == "sum" else np.mean(losses, axis=1)

    starts = range(0, thetas.shape[0], chunk)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(_block, starts))
    else:
        for start in starts:
            _block(start)
    return out


@dataclass(frozen=True)
class CumulativeLoss:
    total: float
    count: int
    empty: bool


def cumulative_online_loss(tau: float, records: Iterable) -> CumulativeLoss:
    """
    Sum (not mean) of l_tau(realized, prediction) over records, in order.

    Records need ``prediction`` and ``realized`` attributes; an empty input gives
    0 with ``empty=True``.
    """
    check_tau(tau)
    total = 0.0
    count = 0
    for record in records:
        total += quantile_loss(tau, record.realized, record.prediction)
        count += 1
    return CumulativeLoss(total=total, count=count, empty=count == 0)

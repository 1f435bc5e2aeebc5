"""
Rolling out-of-sample quantile forecasting.

Schedule: the observation at zero-based index s is forecast from observations
0..s-1 only. For every lambda of the final grid and every tau, a Gibbs
estimate is refreshed at each s by adding the newest design row to the
per-draw loss sums. Online histories of every lambda start at s = k + 1, and
lambda(s) is the best of LambdaGrid(s) on targets before s.

One pilot per tau is fitted on the learning sample (observations before the
first reported target); it centres that tau's importance draws, which are then
reused for every period and every lambda.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from aggregator import ImportanceSampler, PilotFit, PriorSpec, pilot_fit
from aggregator.sampler import ProposalKind
from losses import CumulativeLoss, LossFn, check_tau, quantile_loss
from middleware.errors import CoverageError, DataError, InsufficientHistoryError
from middleware.log import get_logger
from series.features import FeatureMap, default_features
from series.timeseries import TimeSeries

from .lambda_grid import LambdaGrid, select_lambda

logger = get_logger(__name__)

# the lambda sum needs at least one scored target before the first forecast
MIN_HISTORY = 4


@dataclass(frozen=True)
class ForecastRecord:
    period: str
    tau: float
    lambda_used: Optional[float]
    prediction: float
    realized: Optional[float]
    loss: Optional[float]
    flags: Tuple[str, ...] = ()
    estimator: str = "gibbs"

    @classmethod
    def build(
        cls,
        period: str,
        tau: float,
        lambda_used: Optional[float],
        prediction: float,
        realized: Optional[float],
        flags: Sequence[str] = (),
        estimator: str = "gibbs",
    ) -> "ForecastRecord":
        loss = None if realized is None else quantile_loss(tau, realized, prediction)
        return cls(
            period=period,
            tau=float(tau),
            lambda_used=lambda_used,
            prediction=float(prediction),
            realized=None if realized is None else float(realized),
            loss=loss,
            flags=tuple(sorted(set(flags))),
            estimator=estimator,
        )

    @property
    def has_realized(self) -> bool:
        return self.realized is not None


@dataclass(frozen=True)
class SamplerConfig:
    B: float = 100.0
    n_samples: int = 100_000
    proposal_var: float = 1.0
    proposal: ProposalKind = "gaussian"
    antithetic: bool = False
    seed: int = 0
    workers: int = 1
    ess_floor: Optional[float] = None

    @property
    def prior(self) -> PriorSpec:
        return PriorSpec.uniform_l1_ball(self.B + 1.0)


@dataclass(frozen=True)
class BacktestResult:
    records: Tuple[ForecastRecord, ...]
    comparator: Tuple[ForecastRecord, ...]
    taus: Tuple[float, ...]
    grid: LambdaGrid
    start_period: str
    pilots: Dict[float, PilotFit] = field(default_factory=dict)

    def for_tau(self, tau: float, realized_only: bool = True) -> List[ForecastRecord]:
        return [r for r in self.records if r.tau == tau and (r.has_realized or not realized_only)]

    def next_period(self) -> List[ForecastRecord]:
        return [r for r in self.records if not r.has_realized]


def normalise_taus(taus) -> Tuple[float, ...]:
    values = sorted({check_tau(t) for t in taus})
    if not values:
        raise DataError("at least one tau is required")
    return tuple(values)


def resolve_start(series: TimeSeries, features: FeatureMap, start: Union[str, int, None]) -> int:
    """Zero-based index of the first reported target."""
    minimum = max(MIN_HISTORY, features.k + features.dim + 1)
    if start is None:
        index = max(minimum, len(series) // 2)
    elif isinstance(start, str):
        index = series.index_of(start)
    else:
        index = int(start)
    if index < minimum:
        raise InsufficientHistoryError(
            f"start leaves {index} observations of history, need at least {minimum}", start=index, minimum=minimum
        )
    if index > len(series):
        raise DataError(f"start index {index} is beyond the next period", start=index)
    return index


def _ols_prediction(X: np.ndarray, y: np.ndarray, x_next: np.ndarray) -> float:
    theta, *_ = np.linalg.lstsq(X, y, rcond=None)
    return float(x_next @ theta)


def rolling_forecast(
    series: TimeSeries,
    taus,
    features: Optional[FeatureMap] = None,
    config: SamplerConfig = SamplerConfig(),
    start: Union[str, int, None] = None,
    include_next: bool = False,
    comparator: bool = True,
    progress: bool = False,
) -> BacktestResult:
    features = features or default_features(series)
    taus = normalise_taus(taus)
    n = len(series)
    k = features.k
    start_index = resolve_start(series, features, start)
    end = n + 1 if include_next else n
    if start_index >= end:
        raise DataError("no period left to forecast after start", start=start_index, n=n)

    X_all, y_all = features.design(series)
    x_next = features.vector(series, n).x if include_next else None
    grid = LambdaGrid.for_sample_size(end - 1)
    prior = config.prior

    pilots: Dict[float, PilotFit] = {}
    accumulators = {}
    seeds = np.random.SeedSequence(config.seed).spawn(len(taus))
    for tau, seed in zip(taus, seeds):
        pilot = pilot_fit(tau, series, features, stop=start_index)
        sampler = ImportanceSampler(
            prior=prior,
            dim=features.dim,
            n_samples=config.n_samples,
            seed=seed,
            proposal=config.proposal,
            center=pilot.theta,
            variance=config.proposal_var,
            antithetic=config.antithetic,
            ess_floor=config.ess_floor,
            workers=config.workers,
        )
        pilots[tau] = pilot
        accumulators[tau] = sampler.accumulator(LossFn.quantile(tau))
        logger.info(
            "proposal_ready",
            tau=tau,
            pilot=pilot.theta.tolist(),
            mass_inside=sampler.mass_inside,
            n_samples=config.n_samples,
        )

    totals = {tau: np.zeros(len(grid)) for tau in taus}
    scored = 0
    low_ess = {tau: 0 for tau in taus}
    failed = {tau: 0 for tau in taus}
    records: List[ForecastRecord] = []
    comparator_records: List[ForecastRecord] = []

    periods = range(k + 1, end)
    for s in tqdm(periods, desc="backtest", unit="period", disable=not progress, file=sys.stderr):
        row = s - 1 - k
        for tau in taus:
            accumulators[tau].update(X_all[row : row + 1], y_all[row : row + 1])
        x_s = X_all[s - k] if s < n else x_next
        realized = float(y_all[s - k]) if s < n else None
        period = series.timestamps[s] if s < n else series.next_period()

        for tau in taus:
            preds = np.empty(len(grid))
            fallback: Optional[PilotFit] = None
            lam_flags: List[Tuple[str, ...]] = []
            for i, lam in enumerate(grid):
                try:
                    result = accumulators[tau].aggregate(lam)
                    preds[i] = float(x_s @ result.theta_hat.theta)
                    lam_flags.append(result.flags)
                except CoverageError as exc:
                    if failed[tau] == 0:
                        logger.warning("sampler_fit_failed", tau=tau, period=period, error=exc.message)
                    failed[tau] += 1
                    if fallback is None:
                        fallback = _fallback_pilot(tau, series, features, s, pilots[tau])
                    preds[i] = float(x_s @ fallback.theta.theta)
                    lam_flags.append(("sampler_failed",))

            if s >= start_index:
                history = {
                    lam: CumulativeLoss(total=float(totals[tau][i]), count=scored, empty=scored == 0)
                    for i, lam in enumerate(grid)
                }
                choice = select_lambda(LambdaGrid.for_sample_size(s), history)
                chosen = grid.values.index(choice.lam)
                flags = list(lam_flags[chosen]) + list(pilots[tau].flags)
                if choice.cold_start:
                    flags.append("cold_start")
                if "low_ess" in flags:
                    low_ess[tau] += 1
                records.append(ForecastRecord.build(period, tau, choice.lam, preds[chosen], realized, flags))

            if realized is not None:
                totals[tau] += quantile_loss(tau, realized, preds)

        if realized is not None:
            scored += 1
        if comparator and s >= start_index:
            prediction = _ols_prediction(X_all[: s - k], y_all[: s - k], x_s)
            comparator_records.append(
                ForecastRecord.build(period, 0.5, None, prediction, realized, estimator="least_squares")
            )

    for tau in taus:
        if low_ess[tau]:
            logger.warning("low_effective_sample_size", tau=tau, forecasts=low_ess[tau], grid=list(grid.values))
    start_period = series.timestamps[start_index] if start_index < n else series.next_period()
    logger.info("backtest_done", records=len(records), taus=list(taus), start=start_period)
    return BacktestResult(
        records=tuple(records),
        comparator=tuple(comparator_records),
        taus=taus,
        grid=grid,
        start_period=start_period,
        pilots=pilots,
    )


def _fallback_pilot(tau: float, series: TimeSeries, features: FeatureMap, s: int, learning: PilotFit) -> PilotFit:
    if s > features.k + features.dim:
        return pilot_fit(tau, series, features, stop=s)
    return learning

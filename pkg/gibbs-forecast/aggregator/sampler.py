"""
Importance-sampling estimate of the Gibbs mean under a uniform L1-ball prior.

    theta_hat = sum_i T_i w_i / sum_i w_i,
    w_i = exp(-lam r_n(T_i)) 1{||T_i||_1 <= R} / g(T_i)

The draws T_1..T_N are simulated once per sampler and reused for every lambda
and every fitting window, so an online backtest only adds the loss of the new
observation to each draw's running sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Tuple

import numpy as np
from scipy.special import softmax
from scipy.stats import norm

from losses import LossFn, risk_matrix
from middleware.errors import CoverageError, DomainError, InsufficientHistoryError
from middleware.log import get_logger
from series.features import FeatureMap, default_features
from series.timeseries import TimeSeries

from .priors import ParamVector, PriorSpec, l1_ball_log_volume, l1_norms, sample_uniform_l1_ball

logger = get_logger(__name__)

ProposalKind = Literal["gaussian", "prior"]


@dataclass(frozen=True)
class GibbsResult:
    theta_hat: ParamVector
    lam: float
    n_samples: int
    ess: float
    mass_inside: float
    flags: Tuple[str, ...] = ()

    @property
    def low_ess(self) -> bool:
        return "low_ess" in self.flags


class ImportanceSampler:
    """
    Draw-once / evaluate-many importance sampler.

    ``proposal="gaussian"`` draws N(center, variance * I); ``proposal="prior"``
    draws uniformly from the prior ball itself, so the weights reduce to
    exp(-lam r). With ``antithetic=True`` draws come in pairs mirrored through
    the centre (through the origin for the prior proposal).
    """

    def __init__(
        self,
        prior: PriorSpec,
        dim: int,
        n_samples: int,
        seed,
        proposal: ProposalKind = "gaussian",
        center=None,
        variance: float = 1.0,
        antithetic: bool = False,
        ess_floor: Optional[float] = None,
        workers: int = 1,
        chunk: Optional[int] = None,
    ):
        if prior.kind != "uniform_l1_ball":
            raise DomainError("importance sampling targets the uniform L1-ball prior; use gibbs_mean_finite for grids")
        if n_samples < 1:
            raise DomainError(f"need N >= 1 draws, got {n_samples}")
        if dim < 1:
            raise DomainError(f"need dim >= 1, got {dim}")
        if proposal not in ("gaussian", "prior"):
            raise DomainError(f"unknown proposal {proposal!r}")

        self.prior = prior
        self.dim = dim
        self.n_samples = int(n_samples)
        self.proposal = proposal
        self.variance = float(variance)
        self.antithetic = antithetic
        self.ess_floor = self.n_samples / 100.0 if ess_floor is None else float(ess_floor)
        self.workers = workers
        self.chunk = chunk
        self.center = np.zeros(dim) if center is None else np.asarray(getattr(center, "theta", center), dtype=np.float64)
        if self.center.shape != (dim,):
            raise DomainError(f"proposal centre has shape {self.center.shape}, expected ({dim},)")

        rng = np.random.default_rng(seed)
        draws, log_g = self._draw(rng)
        inside = l1_norms(draws) <= prior.radius
        draws.flags.writeable = False
        self.draws = draws
        self.inside = inside
        self._inside_index = np.flatnonzero(inside)
        self._inside_draws = draws[self._inside_index]
        # log(1/g) on draws inside the ball; the constant prior density cancels
        self._log_base = -log_g[inside]
        self.mass_inside = float(np.mean(inside))
        logger.debug(
            "importance_draws_ready",
            proposal=proposal,
            n_samples=self.n_samples,
            dim=dim,
            radius=prior.radius,
            mass_inside=self.mass_inside,
        )

    def _draw(self, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        n = self.n_samples
        half = (n + 1) // 2 if self.antithetic else n
        if self.proposal == "prior":
            base = sample_uniform_l1_ball(rng, self.prior.radius, self.dim, half)
            if self.antithetic:
                base = np.concatenate([base, -base])[:n]
            log_g = np.full(n, -l1_ball_log_volume(self.prior.radius, self.dim))
            return base, log_g

        if not self.variance > 0:
            raise DomainError(f"proposal variance must be > 0, got {self.variance}")
        z = rng.standard_normal(size=(half, self.dim))
        if self.antithetic:
            z = np.concatenate([z, -z])[:n]
        draws = self.center + np.sqrt(self.variance) * z
        log_g = norm.logpdf(draws, loc=self.center, scale=np.sqrt(self.variance)).sum(axis=1)
        return draws, log_g

    # =========================================================================
    # RISKS
    # =========================================================================

    def loss_sums(self, loss: LossFn, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Summed loss on (X, y) for every draw inside the ball, in draw order."""
        if X.shape[1] != self.dim:
            raise DomainError(f"design has {X.shape[1]} columns, sampler has dimension {self.dim}")
        if self._inside_index.size == 0:
            return np.empty(0)
        return risk_matrix(
            loss, self._inside_draws, X, y, chunk=self.chunk, workers=self.workers, reduction="sum"
        )

    def risks(self, loss: LossFn, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        if X.shape[0] == 0:
            raise InsufficientHistoryError("empty design")
        return self.loss_sums(loss, X, y) / X.shape[0]

    def accumulator(self, loss: LossFn) -> "RunningRisk":
        return RunningRisk(sampler=self, loss=loss, sums=np.zeros(self._inside_index.size))

    # =========================================================================
    # AGGREGATION
    # =========================================================================

    def _inside_weights(self, lam: float, risks: np.ndarray) -> np.ndarray:
        if not lam >= 0:
            raise DomainError(f"lambda must be >= 0, got {lam}", lam=lam)
        if self._inside_index.size == 0:
            raise CoverageError(radius=self.prior.radius, n_samples=self.n_samples)
        risks = np.asarray(risks, dtype=np.float64)
        if risks.shape != self._inside_index.shape:
            raise DomainError("risks must come from this sampler's risks() or accumulator")

        return softmax(self._log_base - lam * risks)

    def weights(self, lam: float, risks: np.ndarray) -> np.ndarray:
        """Normalised weights over all N draws; draws outside the ball get exactly 0."""
        full = np.zeros(self.n_samples)
        full[self._inside_index] = self._inside_weights(lam, risks)
        return full

    def aggregate(self, lam: float, risks: np.ndarray) -> GibbsResult:
        """Self-normalised weighted mean of the draws for inverse temperature ``lam``."""
        w = self._inside_weights(lam, risks)
        theta_hat = w @ self._inside_draws
        ess = min(float(1.0 / np.sum(w * w)), float(self.n_samples))

        flags: Tuple[str, ...] = ()
        if ess < self.ess_floor:
            flags = ("low_ess",)
            logger.debug("low_effective_sample_size", lam=lam, ess=ess, floor=self.ess_floor)
        return GibbsResult(
            theta_hat=ParamVector(theta_hat),
            lam=float(lam),
            n_samples=self.n_samples,
            ess=ess,
            mass_inside=self.mass_inside,
            flags=flags,
        )


@dataclass
class RunningRisk:
    """Per-draw loss sums over a growing window; ``risks`` is their mean."""

    sampler: ImportanceSampler
    loss: LossFn
    sums: np.ndarray
    count: int = 0

    def update(self, X: np.ndarray, y: np.ndarray) -> None:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        y = np.atleast_1d(np.asarray(y, dtype=np.float64))
        self.sums += self.sampler.loss_sums(self.loss, X, y)
        self.count += y.size

    @property
    def risks(self) -> np.ndarray:
        if self.count == 0:
            raise InsufficientHistoryError("no observation accumulated yet")
        return self.sums / self.count

    def aggregate(self, lam: float) -> GibbsResult:
        return self.sampler.aggregate(lam, self.risks)


def importance_sample_gibbs(
    tau: float,
    lam: float,
    series: TimeSeries,
    prior: PriorSpec,
    proposal_center,
    proposal_var: float,
    n_samples: int,
    seed,
    features: Optional[FeatureMap] = None,
    stop: Optional[int] = None,
    proposal: ProposalKind = "gaussian",
    antithetic: bool = False,
    workers: int = 1,
) -> GibbsResult:
    """
    One-shot Gibbs estimate of the tau-quantile predictor on observations ``0..stop-1``.

    Deterministic in ``seed``. Build an ``ImportanceSampler`` directly to reuse
    the same draws across several lambdas or windows.
    """
    if not lam >= 0:
        raise DomainError(f"lambda must be >= 0, got {lam}", lam=lam)
    features = features or default_features(series)
    sampler = ImportanceSampler(
        prior=prior,
        dim=features.dim,
        n_samples=n_samples,
        seed=seed,
        proposal=proposal,
        center=proposal_center,
        variance=proposal_var,
        antithetic=antithetic,
        workers=workers,
    )
    X, y = features.design(series, stop=stop)
    result = sampler.aggregate(lam, sampler.risks(LossFn.quantile(tau), X, y))
    if result.low_ess:
        logger.warning("low_effective_sample_size", lam=lam, ess=result.ess, n_samples=n_samples)
    return result

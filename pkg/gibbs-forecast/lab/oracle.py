"""
Replication of the oracle inequality on synthetic data.

For each replication a fresh sample of size n is drawn, the Gibbs estimator is
fitted at lam = sqrt(3n)/kappa with draws from the prior itself, and its true
risk is estimated on a long hold-out stream shared by all replications. The
inequality is violated when

    R(theta_hat) - 2 se  >  min over a grid in Theta(B) of R  +  bound,

where se is the batch-means standard error of the stream estimate. The grid
minimum is never below the true infimum, so a counted violation is a real one
up to Monte Carlo error.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from aggregator import ImportanceSampler, PriorSpec
from aggregator.priors import l1_norms
from losses import LossFn, risk_matrix
from middleware.errors import ConfigurationError, DomainError
from middleware.log import get_logger
from series.synthetic import SyntheticSpec, gen_synthetic

from .bounds import KlMode, ball_bound, kl_exponent, thm51_lambda
from .constants import TheoryConstants
from .report import CheckItem, CheckStatus
from .verifiers import STATIONARY_BURN_IN, features_for, seed_int, spawn_seeds, stream_design

logger = get_logger(__name__)

BATCHES = 50
MAX_GRID_POINTS = 250_000


def violation_tolerance(epsilon: float, replications: int) -> float:
    """epsilon + 2 sqrt(epsilon (1 - epsilon) / M): two binomial standard errors."""
    return epsilon + 2.0 * math.sqrt(epsilon * (1.0 - epsilon) / replications)


def batch_means_se(losses: np.ndarray, batches: int = BATCHES) -> float:
    """Standard error of the mean of a dependent stream from contiguous batch means."""
    usable = (losses.size // batches) * batches
    means = losses[:usable].reshape(batches, -1).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(batches))


def l1_ball_grid(B: float, dim: int, step: float) -> np.ndarray:
    """Cartesian grid of spacing ``step`` on [-B, B]^dim, kept inside the L1 ball of radius B."""
    axis = np.arange(-B, B + step / 2.0, step)
    count = axis.size**dim
    if count > MAX_GRID_POINTS:
        raise ConfigurationError(
            f"risk grid would hold {count} points (> {MAX_GRID_POINTS}); raise grid_step", points=count
        )
    points = np.array(list(itertools.product(axis, repeat=dim)))
    return points[l1_norms(points) <= B + 1e-12]


@dataclass
class TauOutcome:
    tau: float
    kappa: float
    lam: float
    bound: float
    inf_risk: float
    grid_slack: float
    violations: int = 0
    excess: List[float] = field(default_factory=list)

    def violation_rate(self, replications: int) -> float:
        return self.violations / replications


@dataclass
class OracleReport:
    replications: int
    epsilon: float
    n: int
    outcomes: Dict[float, TauOutcome]

    @property
    def tolerance(self) -> float:
        return violation_tolerance(self.epsilon, self.replications)

    @property
    def violation_rate(self) -> float:
        """Worst rate over tau."""
        return max(o.violation_rate(self.replications) for o in self.outcomes.values())

    @property
    def status(self) -> CheckStatus:
        return CheckStatus.PASS if self.violation_rate <= self.tolerance else CheckStatus.FAIL

    def to_items(self) -> List[CheckItem]:
        items = []
        for tau, o in sorted(self.outcomes.items()):
            rate = o.violation_rate(self.replications)
            items.append(
                CheckItem(
                    check="oracle_experiment",
                    name=f"tau={tau:g}",
                    status=CheckStatus.PASS if rate <= self.tolerance else CheckStatus.FAIL,
                    details={
                        "violation_rate": rate,
                        "tolerance": self.tolerance,
                        "replications": self.replications,
                        "n": self.n,
                        "epsilon": self.epsilon,
                        "kappa": o.kappa,
                        "lambda": o.lam,
                        "bound": o.bound,
                        "inf_risk": o.inf_risk,
                        "grid_slack": o.grid_slack,
                        "max_excess": max(o.excess) if o.excess else None,
                    },
                )
            )
        return items


def oracle_experiment(
    spec: SyntheticSpec,
    B: float,
    taus: Sequence[float],
    epsilon: float,
    replications: int,
    seed,
    n: Optional[int] = None,
    n_samples: int = 20_000,
    holdout: int = 100_000,
    grid_step: Optional[float] = None,
    bound_scale: float = 1.0,
    kl_mode: KlMode = "strict",
    workers: int = 1,
    progress: bool = False,
) -> OracleReport:
    if replications < 1:
        raise DomainError(f"need at least one replication, got {replications}")
    if not 0 < epsilon < 1:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}", epsilon=epsilon)
    if not B > 0 or not bound_scale > 0:
        raise DomainError("B and bound_scale must be > 0")
    n = spec.length if n is None else n
    features = features_for(spec)
    dim = features.dim
    step = B / 20.0 if grid_step is None else grid_step

    stream_seq, *replication_seqs = spawn_seeds(seed, replications + 1)
    X_h, y_h = stream_design(spec, features, holdout, seed_int(stream_seq))
    grid = l1_ball_grid(B, dim, step)
    scale = max(1.0, float(np.max(np.abs(X_h))))

    outcomes: Dict[float, TauOutcome] = {}
    for tau in taus:
        loss = LossFn.quantile(tau)
        constants = TheoryConstants.for_synthetic(spec, tau, B, n, k=features.k)
        lam = thm51_lambda(n, constants.kappa)
        bound = bound_scale * ball_bound(
            lam, n, features.k, constants.kappa, B, constants.bound_B, epsilon, exponent=kl_exponent(kl_mode, dim)
        )
        # nearest grid point toward the origin is within dim * step in L1
        slack = loss.lipschitz_K * scale * dim * step
        if slack >= bound:
            raise ConfigurationError(
                f"grid too coarse: discretisation slack {slack:.4g} reaches the bound {bound:.4g}",
                slack=slack,
                bound=bound,
            )
        inf_risk = float(np.min(risk_matrix(loss, grid, X_h, y_h, workers=workers)))
        outcomes[tau] = TauOutcome(
            tau=tau, kappa=constants.kappa, lam=lam, bound=bound, inf_risk=inf_risk, grid_slack=slack
        )
        logger.info("oracle_setup", tau=tau, kappa=constants.kappa, lam=lam, bound=bound, inf_risk=inf_risk)

    prior = PriorSpec.uniform_l1_ball(B + 1.0)
    sample_spec = dataclasses.replace(spec, length=n, burn_in=max(spec.burn_in, STATIONARY_BURN_IN))
    iterator = tqdm(replication_seqs, desc="oracle", unit="rep", disable=not progress, file=sys.stderr)
    for child in iterator:
        data_seq, draw_seq = child.spawn(2)
        X, y = features.design(gen_synthetic(dataclasses.replace(sample_spec, seed=seed_int(data_seq))))
        sampler = ImportanceSampler(prior=prior, dim=dim, n_samples=n_samples, seed=draw_seq, proposal="prior", workers=workers)
        for tau, outcome in outcomes.items():
            loss = LossFn.quantile(tau)
            theta_hat = sampler.aggregate(outcome.lam, sampler.risks(loss, X, y)).theta_hat.theta
            stream_losses = loss.evaluate(X_h @ theta_hat, y_h)
            risk = float(np.mean(stream_losses))
            excess = risk - 2.0 * batch_means_se(stream_losses) - (outcome.inf_risk + outcome.bound)
            outcome.excess.append(excess)
            if excess > 0:
                outcome.violations += 1

    report = OracleReport(replications=replications, epsilon=epsilon, n=n, outcomes=outcomes)
    logger.info("oracle_done", violation_rate=report.violation_rate, tolerance=report.tolerance, status=report.status.value)
    return report

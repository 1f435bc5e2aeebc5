"""
Desk-scale checks of the lemmas behind the oracle inequality.

- dv_check: log pi[e^h] = sup_rho (rho[h] - KL(rho, pi)), attained at the Gibbs measure.
- rio_mgf_check: E exp(t (E h - h)) <= exp(t^2 n (B + C)^2 / 2) for a functional h
  that is 1-Lipschitz in each observation.
- xiaoyin_mgf_check: E exp(+-lam (R - r_n)) <= exp(lam^2 kappa^2 / (n (1 - k/n)^2))
  for a fixed predictor.

Monte Carlo checks are one-sided: they FAIL only when the lower edge of the
confidence band is above the bound, and are INCONCLUSIVE when the relative
standard error exceeds 50%.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp, rel_entr, softmax
from scipy.stats import norm

from losses import LossFn
from middleware.errors import DomainError, PreconditionError
from middleware.log import get_logger
from series.features import AutoregressiveFeatures, FeatureMap, GdpFeatures
from series.synthetic import SyntheticSpec, analytic_sup_bound, gen_synthetic, simulate_paths, weakdep_upper_bound

from .constants import kappa as kappa_of
from .report import CheckItem, CheckStatus

logger = get_logger(__name__)

CONFIDENCE = 0.95
MAX_RELATIVE_SE = 0.5
DV_TOL = 1e-12
SOLVER_TOL = 1e-6
# long enough for |a|^burn_in to be negligible for the generators used here
STATIONARY_BURN_IN = 200
_MC_CHUNK = 10_000


# =============================================================================
# DONSKER-VARADHAN
# =============================================================================


@dataclass(frozen=True)
class DvResult:
    lhs: float
    rhs: float
    argmax: np.ndarray
    rhs_numeric: float

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def numeric_excess(self) -> float:
        return self.rhs_numeric - self.lhs


def _dv_objective(z: np.ndarray, h: np.ndarray, log_prior: np.ndarray):
    log_rho = z - logsumexp(z)
    rho = np.exp(log_rho)
    g = h + log_prior - log_rho
    value = float(rho @ g)
    grad = rho * (g - value)
    return -value, -grad


def dv_check(prior_weights, h, seed=0, starts: int = 5) -> DvResult:
    """
    Both sides of the variational formula on a finite support.

    ``rhs`` evaluates rho[h] - KL(rho, pi) at the Gibbs measure rho ∝ pi e^h;
    ``rhs_numeric`` maximises it with L-BFGS over softmax parameters from
    ``starts`` random points. Points with zero prior mass are left out.
    """
    prior = np.asarray(prior_weights, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if prior.shape != h.shape or prior.ndim != 1 or prior.size == 0:
        raise DomainError("prior weights and h must be 1-D of equal length")
    if np.any(prior < 0) or not np.all(np.isfinite(h)):
        raise DomainError("need nonnegative prior weights and finite h")
    support = prior > 0
    prior = prior / np.sum(prior)

    lhs = float(logsumexp(h[support], b=prior[support]))
    gibbs = np.zeros_like(prior)
    gibbs[support] = softmax(h[support] + np.log(prior[support]))
    rhs = float(gibbs @ h - np.sum(rel_entr(gibbs[support], prior[support])))

    rng = np.random.default_rng(seed)
    log_prior = np.log(prior[support])
    best = -np.inf
    for _ in range(starts):
        z0 = rng.normal(size=int(np.sum(support)))
        fit = minimize(_dv_objective, z0, args=(h[support], log_prior), jac=True, method="L-BFGS-B")
        best = max(best, -float(fit.fun))
    return DvResult(lhs=lhs, rhs=rhs, argmax=gibbs, rhs_numeric=best)


def dv_suite(instances: int, max_support: int, seed) -> CheckItem:
    """Random (pi, h) instances; PASS when every closed-form gap is below 1e-12."""
    rng = np.random.default_rng(seed)
    gaps = []
    excess = []
    for _ in range(instances):
        size = int(rng.integers(1, max_support + 1))
        prior = rng.dirichlet(np.ones(size))
        h = rng.normal(scale=3.0, size=size)
        result = dv_check(prior, h, seed=rng.integers(2**32), starts=3)
        gaps.append(result.gap)
        excess.append(result.numeric_excess)
    worst_gap = float(max(gaps))
    worst_excess = float(max(excess))
    ok = worst_gap < DV_TOL and worst_excess <= SOLVER_TOL
    return CheckItem(
        check="dv_check",
        name=f"{instances} random instances",
        status=CheckStatus.PASS if ok else CheckStatus.FAIL,
        details={"max_gap": worst_gap, "max_numeric_excess": worst_excess, "tolerance": DV_TOL},
    )


# =============================================================================
# MGF CHECKS
# =============================================================================


def _mgf_item(check: str, name: str, values: np.ndarray, rhs: float, **extra) -> CheckItem:
    z = float(norm.ppf(0.5 + CONFIDENCE / 2.0))
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / np.sqrt(values.size)) if values.size > 1 else float("inf")
    lower, upper = mean - z * se, mean + z * se
    details = {"mc_mean": mean, "mc_se": se, "band": [lower, upper], "bound": rhs, "jensen_floor_ok": upper >= 1.0}
    details.update(extra)
    if mean > 0 and se / mean > MAX_RELATIVE_SE:
        status = CheckStatus.INCONCLUSIVE
    elif lower > rhs or upper < 1.0:
        status = CheckStatus.FAIL
    else:
        status = CheckStatus.PASS
    return CheckItem(check=check, name=name, status=status, details=details)


def iid_uniform_spec(n: int, seed: int = 0, bound: float = 1.0) -> SyntheticSpec:
    return SyntheticSpec(family="ar1_bounded", coeffs=(0.0,), innovation_bound=bound, seed=seed, length=n)


def lipschitz_sums(
    spec: SyntheticSpec, replications: int, rng: np.random.Generator, bound: Optional[float] = None
) -> np.ndarray:
    """h = sum of coordinates clipped to [-B, B] for each of ``replications`` paths."""
    bound = analytic_sup_bound(spec) if bound is None else bound
    out = np.empty(replications)
    for start in range(0, replications, _MC_CHUNK):
        stop = min(start + _MC_CHUNK, replications)
        paths = simulate_paths(spec, rng, count=stop - start)
        out[start:stop] = np.sum(np.clip(paths[:, :, 0], -bound, bound), axis=1)
    return out


def rio_mgf_check(
    n: int,
    bound_B: Optional[float],
    t_grid: Sequence[float],
    replications: int,
    seed,
    spec: Optional[SyntheticSpec] = None,
) -> List[CheckItem]:
    """
    One item per t. The default process is iid uniform on [-bound_B, bound_B] (C = 0),
    with bound_B = 1 when it is None.

    A given bound_B must dominate the process's analytic sup bound; None uses that
    analytic bound. Generators here have symmetric innovations and start at zero,
    so E h = 0 exactly and no plug-in mean is needed.
    """
    spec = spec or iid_uniform_spec(n, bound=1.0 if bound_B is None else bound_B)
    spec = dataclasses.replace(spec, length=n)
    analytic = analytic_sup_bound(spec)
    if bound_B is not None and not bound_B >= analytic:
        raise PreconditionError(
            f"bound_B={bound_B:g} is below the process sup bound {analytic:g}", bound_B=bound_B, sup_bound=analytic
        )
    bound = analytic if bound_B is None else float(bound_B)
    weakdep = weakdep_upper_bound(spec)
    h = lipschitz_sums(spec, replications, np.random.default_rng(seed), bound=bound)
    items = []
    for t in t_grid:
        if t < 0:
            raise DomainError(f"t must be >= 0, got {t}")
        values = np.exp(-t * h)
        rhs = float(np.exp(t * t * n * (bound + weakdep) ** 2 / 2.0))
        items.append(
            _mgf_item("rio_mgf_check", f"t={t:g}", values, rhs, t=float(t), n=n, bound_B=bound, weakdep_C=weakdep)
        )
    logger.info("rio_check_done", n=n, replications=replications, statuses=[i.status.value for i in items])
    return items


def spawn_seeds(seed, count: int) -> List[np.random.SeedSequence]:
    """Independent child seeds of an int or a SeedSequence."""
    parent = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return parent.spawn(count)


def seed_int(sequence: np.random.SeedSequence) -> int:
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def features_for(spec: SyntheticSpec) -> FeatureMap:
    return GdpFeatures() if spec.dimension == 2 else AutoregressiveFeatures(k=1)


def stream_design(spec: SyntheticSpec, features: FeatureMap, length: int, seed: int):
    stream = dataclasses.replace(spec, seed=seed, length=length, burn_in=max(spec.burn_in, STATIONARY_BURN_IN))
    return features.design(gen_synthetic(stream))


def xiaoyin_mgf_check(
    spec: SyntheticSpec,
    theta,
    tau: float,
    lambdas: Sequence[float],
    n: int,
    replications: int,
    seed,
    features: Optional[FeatureMap] = None,
    holdout: int = 100_000,
) -> List[CheckItem]:
    """
    Both deviation directions of r_n(theta) around R(theta), for each lambda.

    R(theta) is the average loss on a long stationary stream; samples are drawn
    after a burn-in so that E r_n = R.
    """
    features = features or features_for(spec)
    theta = np.asarray(getattr(theta, "theta", theta), dtype=np.float64)
    loss = LossFn.quantile(tau)
    bound = analytic_sup_bound(spec)
    weakdep = weakdep_upper_bound(spec)
    L = features.lipschitz_budget(theta, bound)
    kappa = kappa_of(loss.lipschitz_K, L, bound, weakdep)
    k = features.k

    data_seq, stream_seq = spawn_seeds(seed, 2)
    X_h, y_h = stream_design(spec, features, holdout, seed_int(stream_seq))
    R = float(np.mean(loss.evaluate(X_h @ theta, y_h)))

    rng = np.random.default_rng(data_seq)
    sample_spec = dataclasses.replace(spec, length=n, burn_in=max(spec.burn_in, STATIONARY_BURN_IN))
    r_n = np.empty(replications)
    for start in range(0, replications, _MC_CHUNK):
        stop = min(start + _MC_CHUNK, replications)
        paths = simulate_paths(sample_spec, rng, count=stop - start)
        for j, path in enumerate(paths):
            X, y = features.design_values(path)
            r_n[start + j] = float(np.mean(loss.evaluate(X @ theta, y)))

    items = []
    for lam in lambdas:
        rhs = float(np.exp(lam**2 * kappa**2 / (n * (1.0 - k / n) ** 2)))
        for direction, deviation in (("R-r", R - r_n), ("r-R", r_n - R)):
            items.append(
                _mgf_item(
                    "xiaoyin_mgf_check",
                    f"lambda={lam:g} {direction}",
                    np.exp(lam * deviation),
                    rhs,
                    lam=float(lam),
                    tau=tau,
                    kappa=kappa,
                    risk=R,
                    n=n,
                )
            )
    logger.info("xiaoyin_check_done", n=n, replications=replications, kappa=kappa)
    return items

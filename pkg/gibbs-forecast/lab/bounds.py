"""
Closed-form oracle-inequality remainders.

thm41: 2 lam kappa^2 / (n (1 - k/n)^2) + (2 KL + 2 log(2/eps)) / lam, the excess
of R(theta_hat) over the integral of R against any rho with KL(rho, pi) = KL.

thm51: the same remainder for the GDP model with lam = sqrt(3n)/kappa and rho a
uniform L1 ball of radius delta = 3/(B_sup lam) around the best theta,

    (2 sqrt(3) kappa / sqrt(n)) [2.25 + log((B+1) B_sup sqrt(n) / kappa) + log(1/eps)/3].

The KL of a small uniform ball against the prior ball is reported in two
conventions: exponent 3 as published, and the parameter dimension (4 for the
GDP model), which is what the volume ratio gives.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Literal, Optional, Tuple

import numpy as np

from middleware.errors import DomainError, PreconditionError

Regime = Literal["thm41", "thm51"]
KlMode = Literal["reproduction", "strict"]

REPRODUCTION_EXPONENT = 3
# 1 / (1 - 2/n)^2 <= 25/16 once n >= 10; 2.25 absorbs it together with log(e) = 1
THM51_MIN_N = 10


def _check_epsilon(epsilon: float, closed: bool = False) -> float:
    ok = 0 < epsilon <= 1 if closed else 0 < epsilon < 1
    if not ok:
        interval = "(0, 1]" if closed else "(0, 1)"
        raise DomainError(f"epsilon must lie in {interval}, got {epsilon}", epsilon=epsilon)
    return float(epsilon)


def _rate_term(lam: float, n: int, k: int, kappa: float) -> float:
    if not 0 < k < n:
        raise DomainError(f"need 0 < k < n, got k={k}, n={n}", k=k, n=n)
    if not lam > 0:
        raise DomainError(f"lambda must be > 0, got {lam}", lam=lam)
    if not kappa > 0:
        raise DomainError(f"kappa must be > 0, got {kappa}", kappa=kappa)
    return 2.0 * lam * kappa**2 / (n * (1.0 - k / n) ** 2)


# =============================================================================
# GENERAL REMAINDER
# =============================================================================


def thm41_bound(lam: float, n: int, k: int, kappa: float, kl: float, epsilon: float) -> float:
    epsilon = _check_epsilon(epsilon)
    if not kl >= 0:
        raise DomainError(f"KL must be >= 0, got {kl}", kl=kl)
    return _rate_term(lam, n, k, kappa) + (2.0 * kl + 2.0 * math.log(2.0 / epsilon)) / lam


def minimize_thm41(
    lambdas: Iterable[float], n: int, k: int, kappa: float, kl: float, epsilon: float
) -> Tuple[float, float]:
    """(lam*, bound(lam*)) over the grid; the first minimiser wins ties."""
    best: Optional[Tuple[float, float]] = None
    for lam in lambdas:
        value = thm41_bound(lam, n, k, kappa, kl, epsilon)
        if best is None or value < best[1]:
            best = (float(lam), value)
    if best is None:
        raise DomainError("empty lambda grid")
    return best


def kl_exponent(mode: KlMode, dim: int) -> int:
    return REPRODUCTION_EXPONENT if mode == "reproduction" else int(dim)


def kl_uniform_balls(B: float, delta: float, dim: int = REPRODUCTION_EXPONENT) -> float:
    """dim * log((B+1)/delta): KL of the uniform delta-ball against the uniform (B+1)-ball."""
    if not B > 0:
        raise DomainError(f"B must be > 0, got {B}", B=B)
    if not 0 < delta <= B + 1:
        raise DomainError(
            f"delta must lie in (0, B+1] = (0, {B + 1:g}], got {delta}: the ball would leave the prior support",
            delta=delta,
            B=B,
        )
    return dim * math.log((B + 1.0) / delta)


# =============================================================================
# GDP MODEL
# =============================================================================


def thm51_lambda(n: int, kappa: float) -> float:
    if not kappa > 0 or n < 1:
        raise DomainError(f"need kappa > 0 and n >= 1, got kappa={kappa}, n={n}")
    return math.sqrt(3.0 * n) / kappa


def optimal_delta(bound_B: float, lam: float) -> float:
    """3 / (B_sup lam), the radius minimising the ball bound with the published exponent."""
    if not bound_B > 0 or not lam > 0:
        raise DomainError(f"need bound_B > 0 and lam > 0, got {bound_B}, {lam}")
    return 3.0 / (bound_B * lam)


def _thm51_terms(n: int, kappa: float, B: float, bound_B: float, epsilon: float) -> Tuple[float, float]:
    epsilon = _check_epsilon(epsilon, closed=True)
    if not kappa > 0 or not B > 0 or not bound_B > 0:
        raise DomainError(f"need kappa, B, bound_B > 0, got {kappa}, {B}, {bound_B}")
    minimum = max(THM51_MIN_N, kappa**2 / (3.0 * bound_B**2))
    if n < minimum:
        raise PreconditionError(f"need n >= max(10, kappa^2 / (3 B_sup^2)) = {minimum:g}, got n={n}", n=n, minimum=minimum)
    prefactor = 2.0 * math.sqrt(3.0) * kappa / math.sqrt(n)
    rate = prefactor * 2.25
    complexity = prefactor * (math.log((B + 1.0) * bound_B * math.sqrt(n) / kappa) + math.log(1.0 / epsilon) / 3.0)
    return rate, complexity


def thm51_bound(n: int, kappa: float, B: float, bound_B: float, epsilon: float) -> float:
    rate, complexity = _thm51_terms(n, kappa, B, bound_B, epsilon)
    return rate + complexity


def ball_bound(
    lam: float,
    n: int,
    k: int,
    kappa: float,
    B: float,
    bound_B: float,
    epsilon: float,
    exponent: int = REPRODUCTION_EXPONENT,
    delta: Optional[float] = None,
) -> float:
    """
    Remainder with rho a uniform delta-ball, any lambda and any KL exponent.

    2 lam kappa^2/(n(1-k/n)^2) + 2 B' delta + 2 (exponent log((B+1)/delta) + log(2/eps)) / lam
    with B' = max(1, B_sup) and delta = min(1, exponent / (B' lam)) unless given.
    """
    epsilon = _check_epsilon(epsilon)
    scale = max(1.0, bound_B)
    if delta is None:
        delta = min(1.0, exponent / (scale * lam))
    kl = kl_uniform_balls(B, delta, exponent)
    return _rate_term(lam, n, k, kappa) + 2.0 * scale * delta + (2.0 * kl + 2.0 * math.log(2.0 / epsilon)) / lam


# =============================================================================
# REPORTS
# =============================================================================


@dataclass(frozen=True)
class BoundReport:
    regime: Regime
    lam: float
    epsilon: float
    kl_term: float
    rate_term: float
    total_bound: float
    n: int
    kappa: float
    kl_mode: Optional[str] = None
    delta: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def bound_report(
    regime: Regime,
    n: int,
    kappa: float,
    epsilon: float,
    k: int = 2,
    lam: Optional[float] = None,
    kl: Optional[float] = None,
    B: Optional[float] = None,
    bound_B: Optional[float] = None,
    kl_mode: KlMode = "reproduction",
    dim: int = 4,
) -> BoundReport:
    """
    Terms of either bound.

    thm41 needs ``lam``; its KL defaults to the ball KL at the optimal delta.
    thm51 needs ``B`` and ``bound_B`` and fixes lam = sqrt(3n)/kappa.
    """
    if regime == "thm51":
        if B is None or bound_B is None:
            raise DomainError("thm51 report needs B and bound_B")
        rate, complexity = _thm51_terms(n, kappa, B, bound_B, epsilon)
        lam = thm51_lambda(n, kappa)
        return BoundReport(
            regime=regime,
            lam=lam,
            epsilon=epsilon,
            kl_term=complexity,
            rate_term=rate,
            total_bound=rate + complexity,
            n=n,
            kappa=kappa,
            kl_mode="reproduction",
            delta=optimal_delta(bound_B, lam),
        )

    if lam is None:
        raise DomainError("thm41 report needs lam")
    delta = None
    if kl is None:
        if B is None or bound_B is None:
            raise DomainError("thm41 report needs kl, or B and bound_B to derive it")
        delta = min(B + 1.0, optimal_delta(bound_B, lam))
        kl = kl_uniform_balls(B, delta, kl_exponent(kl_mode, dim))
    total = thm41_bound(lam, n, k, kappa, kl, epsilon)
    rate = _rate_term(lam, n, k, kappa)
    complexity = (2.0 * kl + 2.0 * math.log(2.0 / epsilon)) / lam
    return BoundReport(
        regime=regime,
        lam=float(lam),
        epsilon=epsilon,
        kl_term=complexity,
        rate_term=rate,
        total_bound=total,
        n=n,
        kappa=kappa,
        kl_mode=kl_mode if delta is not None else None,
        delta=delta,
    )


def slope_increments(grid, values) -> np.ndarray:
    """Increments of the secant slopes of a sampled function; all >= 0 when it is convex."""
    grid = np.asarray(grid, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    return np.diff(np.diff(values) / np.diff(grid))

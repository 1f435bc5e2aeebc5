"""
Constants entering the oracle inequality.

kappa = K (1 + L) (B_sup + C) / sqrt(2), with K the Lipschitz constant of the
loss, L the Lipschitz budget of the predictors, B_sup the almost-sure bound on
the process and C the bound on its weak-dependence coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from losses import LossFn
from middleware.errors import DomainError
from series.synthetic import SyntheticSpec, analytic_sup_bound, weakdep_upper_bound


def kappa(K: float, L: float, bound_B: float, weakdep_C: float) -> float:
    if not K > 0:
        raise DomainError(f"loss Lipschitz constant K must be > 0, got {K}", K=K)
    if not bound_B > 0:
        raise DomainError(f"process bound must be > 0, got {bound_B}", bound_B=bound_B)
    if not L >= 0 or not weakdep_C >= 0:
        raise DomainError(f"L and C must be >= 0, got L={L}, C={weakdep_C}", L=L, C=weakdep_C)
    return K * (1.0 + L) * (bound_B + weakdep_C) / math.sqrt(2.0)


@dataclass(frozen=True)
class TheoryConstants:
    K: float
    L: float
    bound_B: float
    weakdep_C: float
    n: int
    k: int

    def __post_init__(self):
        if not 0 < self.k < self.n:
            raise DomainError(f"need 0 < k < n, got k={self.k}, n={self.n}", k=self.k, n=self.n)
        kappa(self.K, self.L, self.bound_B, self.weakdep_C)

    @property
    def kappa(self) -> float:
        return kappa(self.K, self.L, self.bound_B, self.weakdep_C)

    @classmethod
    def for_gdp(cls, tau: float, B: float, bound_B: float, weakdep_C: float, n: int) -> "TheoryConstants":
        """GDP model: quantile loss, predictors in Theta(B+1) so L = B + 1, memory 2."""
        return cls(K=LossFn.quantile(tau).lipschitz_K, L=B + 1.0, bound_B=bound_B, weakdep_C=weakdep_C, n=n, k=2)

    @classmethod
    def for_synthetic(cls, spec: SyntheticSpec, tau: float, B: float, n: int, k: int = 1) -> "TheoryConstants":
        """Autoregressive predictors on Theta(B+1): the lag coefficients sum to at most B + 1."""
        return cls(
            K=LossFn.quantile(tau).lipschitz_K,
            L=B + 1.0,
            bound_B=analytic_sup_bound(spec),
            weakdep_C=weakdep_upper_bound(spec),
            n=n,
            k=k,
        )

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "L": self.L,
            "bound_B": self.bound_B,
            "weakdep_C": self.weakdep_C,
            "n": self.n,
            "k": self.k,
            "kappa": self.kappa,
        }

"""
Synthetic weakly dependent series: ARMA recursions driven by bounded innovations.

X_t = sum_i a_i X_{t-i} + xi_t + sum_j c_j xi_{t-j},  xi_t ~ Uniform[-b, b] iid,
started from zero. With sum |a_i| < 1 every path satisfies
|X_t| <= b (1 + sum |c_j|) / (1 - sum |a_i|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Tuple

import numpy as np
from scipy.signal import lfilter

from middleware.errors import ContractViolationError
from middleware.log import get_logger

from .timeseries import GDP_COLUMNS, TimeSeries, quarter_labels

logger = get_logger(__name__)

Family = Literal["ar1_bounded", "arma_bounded"]
_MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class SyntheticSpec:
    family: Family
    coeffs: Tuple[float, ...]
    innovation_bound: float
    seed: int
    length: int
    ma_coeffs: Tuple[float, ...] = ()
    dimension: int = 1
    burn_in: int = 0
    start_period: str = "2000Q1"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(a) for a in self.coeffs))
        object.__setattr__(self, "ma_coeffs", tuple(float(c) for c in self.ma_coeffs))
        if self.family not in ("ar1_bounded", "arma_bounded"):
            raise ContractViolationError(f"unknown family {self.family!r}")
        if self.family == "ar1_bounded" and (len(self.coeffs) != 1 or self.ma_coeffs):
            raise ContractViolationError("ar1_bounded takes exactly one AR coefficient and no MA part")
        if not all(math.isfinite(a) for a in self.coeffs + self.ma_coeffs):
            raise ContractViolationError("coefficients must be finite")
        if self.ar_mass >= 1.0:
            raise ContractViolationError(
                f"AR coefficients must satisfy sum |a| < 1, got {self.ar_mass:g}", coeffs=list(self.coeffs)
            )
        if not self.innovation_bound > 0:
            raise ContractViolationError(f"innovation bound b must be > 0, got {self.innovation_bound}")
        if self.length < 1 or self.burn_in < 0 or self.dimension < 1:
            raise ContractViolationError("length and dimension must be >= 1, burn_in >= 0")
        if not 0 <= self.seed <= _MAX_SEED:
            raise ContractViolationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def ar_mass(self) -> float:
        return float(sum(abs(a) for a in self.coeffs))

    def with_seed(self, seed: int, length: int | None = None) -> "SyntheticSpec":
        return SyntheticSpec(
            family=self.family,
            coeffs=self.coeffs,
            innovation_bound=self.innovation_bound,
            seed=seed,
            length=self.length if length is None else length,
            ma_coeffs=self.ma_coeffs,
            dimension=self.dimension,
            burn_in=self.burn_in,
            start_period=self.start_period,
        )


def analytic_sup_bound(spec: SyntheticSpec) -> float:
    """b (1 + sum |c_j|) / (1 - sum |a_i|): the a.s. bound B of every coordinate."""
    ma_mass = sum(abs(c) for c in spec.ma_coeffs)
    return spec.innovation_bound * (1.0 + ma_mass) / (1.0 - spec.ar_mass)


def ma_infinity_weights(spec: SyntheticSpec, tol: float = 1e-17) -> np.ndarray:
    """psi_0, psi_1, ... of X_t = sum psi_i xi_{t-i}, truncated once the tail is below ``tol``."""
    rho = spec.ar_mass
    extra = len(spec.coeffs) + len(spec.ma_coeffs) + 1
    horizon = extra if rho == 0 else extra + int(math.ceil(math.log(tol) / math.log(rho)))
    impulse = np.zeros(horizon)
    impulse[0] = 1.0
    return lfilter(np.r_[1.0, spec.ma_coeffs], np.r_[1.0, -np.asarray(spec.coeffs)], impulse)


def weakdep_upper_bound(spec: SyntheticSpec) -> float:
    """
    Upper bound C on the weak-dependence coefficients: 2 B sum_{i>=1} |psi_i|.

    For AR(1) this is sum_{i>=1} |a|^i 2b/(1-|a|). It is an upper bound, not the
    exact coefficient; a looser C only weakens the checks that use it.
    """
    bound = analytic_sup_bound(spec)
    if spec.family == "ar1_bounded":
        a = abs(spec.coeffs[0])
        return 2.0 * bound * a / (1.0 - a)
    psi = ma_infinity_weights(spec)
    return float(2.0 * bound * np.sum(np.abs(psi[1:])))


def _columns(dimension: int) -> Tuple[str, ...]:
    if dimension == 1:
        return ("value",)
    if dimension == 2:
        return GDP_COLUMNS
    return tuple(f"x{j}" for j in range(dimension))


def simulate_paths(spec: SyntheticSpec, rng: np.random.Generator, count: int | None = None) -> np.ndarray:
    """Raw draws, shape ``(length, dimension)`` or ``(count, length, dimension)``."""
    total = spec.burn_in + spec.length
    shape = (total, spec.dimension) if count is None else (count, total, spec.dimension)
    b = spec.innovation_bound
    innovations = rng.uniform(-b, b, size=shape)
    axis = 0 if count is None else 1
    paths = lfilter(np.r_[1.0, spec.ma_coeffs], np.r_[1.0, -np.asarray(spec.coeffs)], innovations, axis=axis)
    return paths[spec.burn_in :] if count is None else paths[:, spec.burn_in :]


def gen_synthetic(spec: SyntheticSpec) -> TimeSeries:
    """Deterministic in ``spec.seed``; bound_B is the analytic sup bound."""
    rng = np.random.default_rng(spec.seed)
    values = simulate_paths(spec, rng)
    bound = analytic_sup_bound(spec)
    logger.debug("synthetic_generated", family=spec.family, length=spec.length, seed=spec.seed, bound_B=bound)
    return TimeSeries(
        timestamps=tuple(quarter_labels(spec.start_period, spec.length)),
        values=values,
        columns=_columns(spec.dimension),
        bound_B=bound,
        bound_source="analytic",
    )

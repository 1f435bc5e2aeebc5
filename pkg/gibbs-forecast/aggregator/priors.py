"""
Parameter vectors and priors on them.

Two priors are supported: the uniform distribution on an L1 ball
Theta(R) = {theta : sum |theta_i| <= R}, and a finite grid of points with
probability weights (the finite-support case, also used to mix several models).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from scipy.special import gammaln

from middleware.errors import DomainError

PriorKind = Literal["uniform_l1_ball", "finite_grid"]

# tolerance on the total mass of finite-grid weights
_MASS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ParamVector:
    """Coefficients of a predictor that is linear in theta."""

    theta: np.ndarray

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=np.float64)).copy()
        if theta.ndim != 1:
            raise DomainError(f"parameter vector must be 1-D, got shape {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise DomainError("parameter vector has non-finite entries")
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ParamVector) and np.array_equal(self.theta, other.theta)

    __hash__ = None  # type: ignore[assignment]

    @property
    def dim(self) -> int:
        return int(self.theta.size)

    @property
    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.theta)))

    def in_ball(self, radius: float) -> bool:
        return self.l1_norm <= radius

    def tolist(self):
        return [float(v) for v in self.theta]


def l1_norms(thetas: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(thetas), axis=-1)


def l1_ball_log_volume(radius: float, dim: int) -> float:
    """log of (2R)^d / d!, the Lebesgue volume of the d-dimensional L1 ball."""
    if not radius > 0 or dim < 1:
        raise DomainError(f"need radius > 0 and dim >= 1, got radius={radius}, dim={dim}")
    return float(dim * np.log(2.0 * radius) - gammaln(dim + 1))


def sample_uniform_l1_ball(rng: np.random.Generator, radius: float, dim: int, size: int) -> np.ndarray:
    """
    ``size`` iid uniform draws from the L1 ball of the given radius.

    The first ``dim`` coordinates of a flat Dirichlet on ``dim + 1`` cells are
    uniform on the solid simplex; random signs spread them over all orthants.
    """
    if not radius > 0 or dim < 1 or size < 0:
        raise DomainError(f"need radius > 0, dim >= 1 and size >= 0, got {radius}, {dim}, {size}")
    spacings = rng.standard_exponential(size=(size, dim + 1))
    simplex = spacings[:, :dim] / np.sum(spacings, axis=1, keepdims=True)
    signs = rng.choice(np.array([-1.0, 1.0]), size=(size, dim))
    return radius * signs * simplex


@dataclass(frozen=True, eq=False)
class PriorSpec:
    kind: PriorKind
    radius: Optional[float] = None
    points: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind == "uniform_l1_ball":
            if self.radius is None or not self.radius > 0:
                raise DomainError(f"uniform_l1_ball prior needs radius > 0, got {self.radius}")
            return
        if self.kind != "finite_grid":
            raise DomainError(f"unknown prior kind {self.kind!r}")
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, None]
        weights = np.asarray(self.weights, dtype=np.float64)
        if points.shape[0] == 0 or weights.shape != (points.shape[0],):
            raise DomainError("finite_grid prior needs one weight per point")
        if np.any(weights < 0) or abs(float(np.sum(weights)) - 1.0) > _MASS_TOL:
            raise DomainError("finite_grid weights must be nonnegative and sum to 1")
        if not np.all(np.isfinite(points)):
            raise DomainError("finite_grid points must be finite")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform_l1_ball(cls, radius: float) -> "PriorSpec":
        return cls(kind="uniform_l1_ball", radius=float(radius))

    @classmethod
    def finite_grid(cls, points, weights=None) -> "PriorSpec":
        points = np.asarray(points, dtype=np.float64)
        if weights is None:
            weights = np.full(points.shape[0], 1.0 / points.shape[0])
        return cls(kind="finite_grid", points=points, weights=weights)

    @classmethod
    def mixture(cls, grids, model_weights) -> "PriorSpec":
        """Finite prior over several models: sum_j p_j pi_j, each pi_j a finite grid."""
        model_weights = np.asarray(model_weights, dtype=np.float64)
        if len(grids) != model_weights.size:
            raise DomainError("one model weight per grid")
        points = np.concatenate([g.points for g in grids], axis=0)
        weights = np.concatenate([p * g.weights for g, p in zip(grids, model_weights)])
        return cls(kind="finite_grid", points=points, weights=weights)

"""Exact Gibbs aggregation on a finite support; the reference the sampler is checked against."""

from __future__ import annotations

import numpy as np
from scipy.special import softmax

from middleware.errors import DegenerateWeightsError, DomainError

from .priors import ParamVector

_MASS_TOL = 1e-9


def gibbs_weights_finite(lam: float, risks, prior_weights) -> np.ndarray:
    """
    w_i proportional to pi_i exp(-lam r_i), normalised.

    Computed in the log domain with a max-shift, so lam * r up to 1e6 is fine.
    Points with infinite risk get weight 0 for lam > 0.
    """
    if not lam >= 0:
        raise DomainError(f"lambda must be >= 0, got {lam}", lam=lam)
    risks = np.asarray(risks, dtype=np.float64)
    prior = np.asarray(prior_weights, dtype=np.float64)
    if risks.shape != prior.shape or risks.ndim != 1 or risks.size == 0:
        raise DomainError("risks and prior weights must be 1-D of equal length")
    if np.any(np.isnan(risks)) or np.any(risks == -np.inf):
        raise DomainError("risks must be finite or +inf")
    if np.any(prior < 0) or abs(float(np.sum(prior)) - 1.0) > _MASS_TOL:
        raise DomainError("prior weights must be a probability vector")
    if lam == 0:
        return prior.copy()

    with np.errstate(divide="ignore"):
        log_w = np.log(prior)
    log_w = np.where(np.isinf(risks), -np.inf, log_w - lam * np.where(np.isinf(risks), 0.0, risks))
    if not np.isfinite(np.max(log_w)):
        raise DegenerateWeightsError("all prior mass sits on points with infinite risk")
    return softmax(log_w)


def gibbs_mean_finite(lam: float, points, risks, prior_weights) -> ParamVector:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    w = gibbs_weights_finite(lam, risks, prior_weights)
    if points.shape[0] != w.size:
        raise DomainError(f"{points.shape[0]} points but {w.size} risks")
    return ParamVector(w @ points)

"""Priors, exact finite Gibbs aggregation, the pilot fit and the importance sampler."""

from .finite import gibbs_mean_finite, gibbs_weights_finite
from .pilot import PilotFit, fit_pilot, pilot_fit
from .priors import ParamVector, PriorSpec, l1_ball_log_volume, sample_uniform_l1_ball
from .sampler import GibbsResult, ImportanceSampler, RunningRisk, importance_sample_gibbs

__all__ = [
    "gibbs_mean_finite",
    "gibbs_weights_finite",
    "PilotFit",
    "fit_pilot",
    "pilot_fit",
    "ParamVector",
    "PriorSpec",
    "l1_ball_log_volume",
    "sample_uniform_l1_ball",
    "GibbsResult",
    "ImportanceSampler",
    "RunningRisk",
    "importance_sample_gibbs",
]

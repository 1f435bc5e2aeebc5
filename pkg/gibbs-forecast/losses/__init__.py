"""Quantile and other Lipschitz losses, empirical risks and cumulative online loss."""

from .pinball import (
    CumulativeLoss,
    LossFn,
    check_tau,
    cumulative_online_loss,
    empirical_risk,
    quantile_loss,
    risk_matrix,
)

__all__ = [
    "CumulativeLoss",
    "LossFn",
    "check_tau",
    "cumulative_online_loss",
    "empirical_risk",
    "quantile_loss",
    "risk_matrix",
]

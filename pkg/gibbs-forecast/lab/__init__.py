"""Oracle-inequality constants and bounds, lemma checks and the synthetic replication."""

from .bounds import (
    BoundReport,
    ball_bound,
    bound_report,
    kl_uniform_balls,
    minimize_thm41,
    optimal_delta,
    thm41_bound,
    thm51_bound,
    thm51_lambda,
)
from .constants import TheoryConstants, kappa
from .oracle import OracleReport, oracle_experiment
from .report import CheckItem, CheckStatus, LabReport
from .suite import VerifyBudget, run_verification
from .verifiers import DvResult, dv_check, dv_suite, rio_mgf_check, xiaoyin_mgf_check

__all__ = [
    "BoundReport",
    "ball_bound",
    "bound_report",
    "kl_uniform_balls",
    "minimize_thm41",
    "optimal_delta",
    "thm41_bound",
    "thm51_bound",
    "thm51_lambda",
    "TheoryConstants",
    "kappa",
    "OracleReport",
    "oracle_experiment",
    "CheckItem",
    "CheckStatus",
    "LabReport",
    "VerifyBudget",
    "run_verification",
    "DvResult",
    "dv_check",
    "dv_suite",
    "rio_mgf_check",
    "xiaoyin_mgf_check",
]

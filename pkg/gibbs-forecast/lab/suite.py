"""Runs every lab check under one budget and collects a LabReport."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Tuple

import numpy as np

from middleware.errors import PreconditionError
from middleware.log import get_logger
from series.synthetic import SyntheticSpec, analytic_sup_bound, weakdep_upper_bound

from .bounds import bound_report, minimize_thm41, slope_increments, thm41_bound, thm51_bound
from .constants import TheoryConstants
from .oracle import oracle_experiment
from .report import CheckItem, CheckStatus, LabReport
from .verifiers import dv_suite, rio_mgf_check, spawn_seeds, xiaoyin_mgf_check

logger = get_logger(__name__)


@dataclass(frozen=True)
class VerifyBudget:
    epsilon: float = 0.1
    # synthetic AR(1) used by the MGF and oracle checks
    ar_coeff: float = 0.5
    innovation_bound: float = 1.0
    dv_instances: int = 100
    dv_max_support: int = 50
    rio_n: int = 50
    rio_t_grid: Tuple[float, ...] = (0.0, 0.05, 0.1, 0.2)
    rio_replications: int = 100_000
    xiaoyin_n: int = 100
    xiaoyin_lambdas: Tuple[float, ...] = (0.5, 2.0)
    xiaoyin_replications: int = 20_000
    xiaoyin_theta: Tuple[float, ...] = (0.0, 0.5)
    oracle_n: int = 400
    oracle_B: float = 1.0
    oracle_taus: Tuple[float, ...] = (0.25, 0.5, 0.75)
    oracle_replications: int = 200
    oracle_samples: int = 20_000
    oracle_holdout: int = 100_000
    gdp_B: float = 100.0
    checks: Tuple[str, ...] = ("bounds", "dv", "rio", "xiaoyin", "oracle")

    def ar_spec(self, n: int, seed: int = 0) -> SyntheticSpec:
        return SyntheticSpec(
            family="ar1_bounded",
            coeffs=(self.ar_coeff,),
            innovation_bound=self.innovation_bound,
            seed=seed,
            length=n,
        )


def bound_checks(budget: VerifyBudget, report: LabReport) -> None:
    """Bound reports for the GDP model plus convexity and decay checks of the closed forms."""
    spec = budget.ar_spec(budget.oracle_n)
    constants = TheoryConstants.for_gdp(
        0.5,
        budget.gdp_B,
        bound_B=analytic_sup_bound(spec),
        weakdep_C=weakdep_upper_bound(spec),
        n=budget.oracle_n,
    )
    kappa = constants.kappa
    lambdas = np.geomspace(0.01, 1000.0, 50)
    for mode in ("reproduction", "strict"):
        lam, _ = minimize_thm41(lambdas, constants.n, constants.k, kappa, 0.0, budget.epsilon)
        report.bounds.append(
            bound_report(
                "thm41",
                constants.n,
                kappa,
                budget.epsilon,
                k=constants.k,
                lam=lam,
                B=budget.gdp_B,
                bound_B=constants.bound_B,
                kl_mode=mode,
            ).to_dict()
        )
    try:
        report.bounds.append(
            bound_report("thm51", constants.n, kappa, budget.epsilon, B=budget.gdp_B, bound_B=constants.bound_B).to_dict()
        )
    except PreconditionError as exc:
        report.bounds.append({"regime": "thm51", "skipped": exc.message, **exc.context})

    values = [thm41_bound(lam, constants.n, constants.k, kappa, 5.0, budget.epsilon) for lam in lambdas]
    increments = slope_increments(lambdas, values)
    report.extend(
        [
            CheckItem(
                check="bound_arithmetic",
                name="thm41 convex in lambda",
                status=CheckStatus.PASS if np.all(increments >= -1e-9) else CheckStatus.FAIL,
                details={"min_slope_increment": float(np.min(increments)), "grid_points": len(lambdas)},
            )
        ]
    )
    ratio = thm51_bound(100 * 300, 30.0, 99.0, 1.0, 1.0) / thm51_bound(300, 30.0, 99.0, 1.0, 1.0)
    report.extend(
        [
            CheckItem(
                check="bound_arithmetic",
                name="thm51 decays like log(n)/sqrt(n)",
                status=CheckStatus.PASS if ratio < 0.2 else CheckStatus.FAIL,
                details={"ratio_100n_over_n": ratio},
            )
        ]
    )


def run_verification(budget: VerifyBudget, seed: int, workers: int = 1, progress: bool = False) -> LabReport:
    report = LabReport(inputs={"seed": seed, **asdict(budget)})
    dv_seed, rio_seed, xiaoyin_seed, oracle_seed = spawn_seeds(seed, 4)

    if "bounds" in budget.checks:
        bound_checks(budget, report)
    if "dv" in budget.checks:
        report.extend([dv_suite(budget.dv_instances, budget.dv_max_support, dv_seed)])
    if "rio" in budget.checks:
        report.extend(rio_mgf_check(budget.rio_n, 1.0, budget.rio_t_grid, budget.rio_replications, rio_seed))
        report.extend(
            rio_mgf_check(
                budget.rio_n,
                None,
                budget.rio_t_grid,
                budget.rio_replications,
                rio_seed.spawn(1)[0],
                spec=budget.ar_spec(budget.rio_n),
            )
        )
    if "xiaoyin" in budget.checks:
        report.extend(
            xiaoyin_mgf_check(
                budget.ar_spec(budget.xiaoyin_n),
                np.array(budget.xiaoyin_theta),
                0.5,
                budget.xiaoyin_lambdas,
                budget.xiaoyin_n,
                budget.xiaoyin_replications,
                xiaoyin_seed,
            )
        )
    if "oracle" in budget.checks:
        oracle = oracle_experiment(
            budget.ar_spec(budget.oracle_n),
            B=budget.oracle_B,
            taus=budget.oracle_taus,
            epsilon=budget.epsilon,
            replications=budget.oracle_replications,
            seed=oracle_seed,
            n_samples=budget.oracle_samples,
            holdout=budget.oracle_holdout,
            workers=workers,
            progress=progress,
        )
        report.extend(oracle.to_items())

    logger.info("verification_done", status=report.status.value, counts=report.counts())
    return report

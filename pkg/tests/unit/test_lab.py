"""Unit tests for the theory constants, closed-form bounds and lemma verifiers."""

import math

import numpy as np
import pytest

from lab import (
    CheckItem,
    CheckStatus,
    LabReport,
    TheoryConstants,
    VerifyBudget,
    ball_bound,
    bound_report,
    dv_check,
    dv_suite,
    kappa,
    kl_uniform_balls,
    minimize_thm41,
    optimal_delta,
    rio_mgf_check,
    run_verification,
    thm41_bound,
    thm51_bound,
    thm51_lambda,
    xiaoyin_mgf_check,
)
from lab.bounds import slope_increments
from lab.oracle import batch_means_se, l1_ball_grid, violation_tolerance
from middleware.errors import ConfigurationError, DomainError, PreconditionError


@pytest.mark.unit
class TestKappa:
    """Tests for kappa and TheoryConstants."""

    def test_reference_value(self):
        assert kappa(1.0, 101.0, 1.0, 1.0) == pytest.approx(102.0 * math.sqrt(2.0), rel=1e-12)
        assert kappa(1.0, 101.0, 1.0, 1.0) == pytest.approx(144.2497, abs=1e-4)

    def test_normalisation(self):
        assert kappa(1.0, 0.0, math.sqrt(2.0), 0.0) == pytest.approx(1.0, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            kappa(0.0, 1.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            kappa(1.0, 1.0, 0.0, 1.0)

    def test_homogeneous_in_bound_plus_dependence(self):
        base = kappa(0.75, 3.0, 2.0, 4.0)

        assert kappa(0.75, 3.0, 2.0 * 2.5, 4.0 * 2.5) == pytest.approx(2.5 * base, rel=1e-12)

    def test_gdp_constants(self):
        constants = TheoryConstants.for_gdp(0.05, 100.0, bound_B=2.0, weakdep_C=4.0, n=95)

        assert constants.K == 0.95
        assert constants.L == 101.0
        assert constants.k == 2
        assert constants.to_dict()["kappa"] == pytest.approx(0.95 * 102.0 * 6.0 / math.sqrt(2.0))

    def test_synthetic_constants(self, ar_spec):
        constants = TheoryConstants.for_synthetic(ar_spec, 0.5, B=1.0, n=100)

        assert (constants.bound_B, constants.weakdep_C) == pytest.approx((2.0, 4.0))

    def test_memory_below_sample_size(self):
        with pytest.raises(DomainError):
            TheoryConstants(K=1.0, L=1.0, bound_B=1.0, weakdep_C=0.0, n=2, k=2)


@pytest.mark.unit
class TestBounds:
    """Tests for the closed-form remainders."""

    def test_thm41_hand_value(self):
        value = thm41_bound(1.0, 100, 2, 1.0, 0.0, 2.0 / math.e)

        assert value == pytest.approx(2.0 / 96.04 + 2.0, rel=1e-12)
        assert value == pytest.approx(2.020824, abs=1e-6)

    def test_thm41_linear_in_kl(self):
        lam = 3.0
        first = thm41_bound(lam, 50, 1, 2.0, 1.5, 0.1)
        doubled = thm41_bound(lam, 50, 1, 2.0, 3.0, 0.1)

        assert doubled - first == pytest.approx(2.0 * 1.5 / lam, rel=1e-12)

    @pytest.mark.parametrize("epsilon", [0.0, 1.0, -0.5])
    def test_thm41_epsilon_domain(self, epsilon):
        with pytest.raises(DomainError):
            thm41_bound(1.0, 100, 2, 1.0, 0.0, epsilon)

    def test_grid_minimum(self):
        lambdas = np.geomspace(0.1, 100.0, 30)

        lam, value = minimize_thm41(lambdas, 200, 2, 3.0, 4.0, 0.05)

        assert lam in lambdas
        assert all(value <= thm41_bound(x, 200, 2, 3.0, 4.0, 0.05) for x in lambdas)

    def test_convex_in_lambda(self):
        lambdas = np.geomspace(0.01, 1000.0, 80)
        values = [thm41_bound(lam, 300, 2, 10.0, 7.0, 0.1) for lam in lambdas]

        assert np.all(slope_increments(lambdas, values) >= -1e-9)

    def test_kl_of_balls(self):
        assert kl_uniform_balls(99.0, 100.0) == 0.0
        assert kl_uniform_balls(99.0, 1.0) == pytest.approx(13.8155, abs=1e-4)
        assert kl_uniform_balls(99.0, 1.0, dim=4) == pytest.approx(18.4207, abs=1e-4)
        with pytest.raises(DomainError):
            kl_uniform_balls(99.0, 100.5)

    def test_thm51_hand_value(self):
        assert thm51_lambda(300, 30.0) == pytest.approx(1.0)
        assert thm51_bound(300, 30.0, 99.0, 1.0, 1.0) == pytest.approx(37.8352, abs=1e-3)

    def test_thm51_precondition(self):
        with pytest.raises(PreconditionError):
            thm51_bound(3, math.sqrt(3.0), 99.0, 1.0, 0.1)
        with pytest.raises(PreconditionError):
            thm51_bound(299, 30.0, 99.0, 1.0, 0.1)

    def test_thm51_decays(self):
        for n in (100, 1000, 10_000):
            ratio = thm51_bound(100 * n, 10.0, 99.0, 1.0, 0.1) / thm51_bound(n, 10.0, 99.0, 1.0, 0.1)
            assert ratio < 0.2

    def test_optimal_delta(self):
        assert optimal_delta(1.0, 1.0) == 3.0
        with pytest.raises(DomainError):
            optimal_delta(0.0, 1.0)

    def test_ball_bound_above_rate_term(self):
        value = ball_bound(20.0, 400, 1, 3.0, 1.0, 2.0, 0.1, exponent=2)

        assert value > 2.0 * 20.0 * 9.0 / (400 * (1 - 1 / 400) ** 2)

    def test_reports_both_kl_conventions(self):
        reproduction = bound_report("thm41", 100, 5.0, 0.1, lam=2.0, B=99.0, bound_B=2.0)
        strict = bound_report("thm41", 100, 5.0, 0.1, lam=2.0, B=99.0, bound_B=2.0, kl_mode="strict")

        assert reproduction.delta == strict.delta == 0.75
        assert strict.total_bound > reproduction.total_bound
        assert reproduction.total_bound == pytest.approx(reproduction.rate_term + reproduction.kl_term)

    def test_thm51_report(self):
        report = bound_report("thm51", 300, 30.0, 1.0, B=99.0, bound_B=1.0)

        assert report.lam == pytest.approx(1.0)
        assert report.total_bound == pytest.approx(37.8352, abs=1e-3)
        assert report.to_dict()["regime"] == "thm51"

    def test_report_needs_inputs(self):
        with pytest.raises(DomainError):
            bound_report("thm41", 100, 5.0, 0.1)
        with pytest.raises(DomainError):
            bound_report("thm51", 100, 5.0, 0.1)


@pytest.mark.unit
class TestDonskerVaradhan:
    """Tests for dv_check and dv_suite."""

    def test_constant_h(self):
        prior = np.array([0.1, 0.6, 0.3])

        result = dv_check(prior, np.full(3, 2.5))

        assert result.lhs == pytest.approx(2.5, abs=1e-12)
        np.testing.assert_allclose(result.argmax, prior, atol=1e-12)

    def test_two_points(self):
        result = dv_check([0.5, 0.5], [0.0, math.log(3.0)])

        assert result.lhs == pytest.approx(math.log(2.0), abs=1e-12)
        np.testing.assert_allclose(result.argmax, [0.25, 0.75], atol=1e-12)
        assert result.gap < 1e-12
        assert result.numeric_excess <= 1e-6

    def test_zero_prior_mass_ignored(self):
        result = dv_check([0.0, 1.0], [100.0, 1.0])

        assert result.lhs == pytest.approx(1.0)
        assert result.argmax[0] == 0.0

    def test_suite_passes(self):
        item = dv_suite(instances=20, max_support=15, seed=3)

        assert item.status is CheckStatus.PASS
        assert item.details["max_gap"] < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            dv_check([0.5, 0.5], [1.0])


@pytest.mark.unit
class TestMgfChecks:
    """Tests for the Monte Carlo moment-generating-function checks."""

    def test_rio_t_zero_is_exactly_one(self):
        (item,) = rio_mgf_check(n=20, bound_B=1.0, t_grid=[0.0], replications=200, seed=0)

        assert item.details["mc_mean"] == 1.0
        assert item.details["bound"] == 1.0
        assert item.status is CheckStatus.PASS

    def test_rio_iid_reference_case(self):
        items = rio_mgf_check(n=50, bound_B=1.0, t_grid=[0.1], replications=20_000, seed=1)

        assert items[0].details["bound"] == pytest.approx(math.exp(0.25))
        assert items[0].status is CheckStatus.PASS
        assert items[0].details["jensen_floor_ok"]

    def test_rio_bound_scales_the_process(self):
        (item,) = rio_mgf_check(n=50, bound_B=2.0, t_grid=[0.1], replications=5_000, seed=2)

        assert item.details["bound_B"] == 2.0
        assert item.details["bound"] == pytest.approx(math.exp(1.0))
        assert item.status is CheckStatus.PASS

    def test_rio_bound_below_process_sup(self, ar_spec):
        with pytest.raises(PreconditionError):
            rio_mgf_check(n=50, bound_B=0.5, t_grid=[0.1], replications=10, seed=0, spec=ar_spec)

    def test_rio_negative_t(self):
        with pytest.raises(DomainError):
            rio_mgf_check(n=10, bound_B=None, t_grid=[-0.1], replications=10, seed=0)

    def test_xiaoyin_items(self, ar_spec):
        items = xiaoyin_mgf_check(
            ar_spec, [0.0, 0.5], 0.5, lambdas=[0.5, 2.0], n=60, replications=500, seed=4, holdout=20_000
        )

        assert [item.name for item in items] == ["lambda=0.5 R-r", "lambda=0.5 r-R", "lambda=2 R-r", "lambda=2 r-R"]
        for item in items:
            assert item.details["mc_mean"] < item.details["bound"]
            assert item.details["kappa"] > 0


@pytest.mark.unit
class TestReport:
    """Tests for LabReport aggregation and the oracle helpers."""

    def _item(self, status):
        return CheckItem(check="c", name="n", status=status)

    def test_status_precedence(self):
        report = LabReport()
        report.extend([self._item(CheckStatus.PASS), self._item(CheckStatus.INCONCLUSIVE)])

        assert report.status is CheckStatus.INCONCLUSIVE
        report.extend([self._item(CheckStatus.FAIL)])
        assert report.status is CheckStatus.FAIL
        assert report.counts() == {"PASS": 1, "FAIL": 1, "INCONCLUSIVE": 1}

    def test_to_dict(self):
        report = LabReport(inputs={"seed": 1})
        report.extend([CheckItem(check="dv_check", name="x", status=CheckStatus.PASS, details={"gap": 0.0})])

        out = report.to_dict()

        assert out["status"] == "PASS"
        assert out["checks"] == [{"check": "dv_check", "name": "x", "status": "PASS", "gap": 0.0}]

    def test_violation_tolerance(self):
        assert violation_tolerance(0.1, 200) == pytest.approx(0.1 + 0.0424, abs=1e-4)

    def test_batch_means_of_constant(self):
        assert batch_means_se(np.ones(1000)) == 0.0

    def test_grid_inside_ball(self):
        grid = l1_ball_grid(1.0, 2, 0.5)

        assert len(grid) == 13
        assert np.all(np.sum(np.abs(grid), axis=1) <= 1.0 + 1e-12)

    def test_grid_size_limit(self):
        with pytest.raises(ConfigurationError):
            l1_ball_grid(1.0, 4, 0.001)

    def test_bounds_and_dv_only(self):
        budget = VerifyBudget(checks=("bounds", "dv"), dv_instances=5, dv_max_support=8)

        report = run_verification(budget, seed=0)

        assert [item.check for item in report.items] == ["bound_arithmetic", "bound_arithmetic", "dv_check"]
        assert report.status is CheckStatus.PASS
        assert [b["regime"] for b in report.bounds] == ["thm41", "thm41", "thm51"]
        assert report.inputs["seed"] == 0

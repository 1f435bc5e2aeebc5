"""
Integration tests for the rolling forecaster: realizable data, causality,
determinism and coverage on a synthetic AR(1).
"""

import numpy as np
import pytest

from forecaster import LambdaGrid, SamplerConfig, coverage_freq, rolling_forecast, summarize
from series import AutoregressiveFeatures, SyntheticSpec, gen_synthetic
from tests.conftest import gdp_series, make_gdp_values

TAUS = (0.05, 0.25, 0.5, 0.75, 0.95)


@pytest.mark.integration
class TestRealizable:
    """Noiseless data generated by a parameter inside the prior ball."""

    def test_median_forecasts_are_exact(self, realizable_series):
        config = SamplerConfig(n_samples=2000, antithetic=True, seed=4)

        result = rolling_forecast(realizable_series, [0.5], config=config, comparator=False)

        assert len(result.records) == len(realizable_series) - 18
        for record in result.records:
            assert abs(record.prediction - record.realized) < 1e-8
            assert record.loss < 1e-8

    def test_pilot_centres_on_true_parameter(self, realizable_series):
        from tests.conftest import THETA_STAR

        result = rolling_forecast(realizable_series, [0.5], config=SamplerConfig(n_samples=200, seed=1))

        np.testing.assert_allclose(result.pilots[0.5].theta.theta, THETA_STAR, atol=1e-8)


@pytest.mark.integration
class TestRollingSchedule:
    """Schedule, causality and determinism of rolling_forecast."""

    CONFIG = SamplerConfig(n_samples=1500, proposal_var=0.5, seed=21)

    def test_record_layout(self, gdp_values):
        series = gdp_series(gdp_values)

        result = rolling_forecast(series, TAUS, config=self.CONFIG, start="1995Q1")

        assert result.start_period == "1995Q1"
        assert len(result.records) == 20 * len(TAUS)
        assert len(result.comparator) == 20
        assert {r.estimator for r in result.comparator} == {"least_squares"}
        assert result.grid.values == LambdaGrid.for_sample_size(39).values

    def test_lambda_comes_from_grid_of_fitting_sample(self, gdp_values):
        series = gdp_series(gdp_values)

        result = rolling_forecast(series, [0.25, 0.75], config=self.CONFIG, start="1993Q1")

        for record in result.records:
            s = series.index_of(record.period)
            assert record.lambda_used in LambdaGrid.for_sample_size(s)

    def test_loss_field_consistency(self, gdp_values):
        from losses import quantile_loss

        result = rolling_forecast(gdp_series(gdp_values), TAUS, config=self.CONFIG)

        for record in result.records:
            assert record.loss == quantile_loss(record.tau, record.realized, record.prediction)

    def test_future_values_do_not_leak(self, gdp_values):
        mutated = gdp_values.copy()
        mutated[30:] += np.array([5.0, -20.0])

        original = rolling_forecast(gdp_series(gdp_values), TAUS, config=self.CONFIG, start=20)
        changed = rolling_forecast(gdp_series(mutated), TAUS, config=self.CONFIG, start=20)

        cutoff = gdp_series(gdp_values).timestamps[30]
        before = [r for r in original.records if r.period < cutoff]
        assert before
        for a, b in zip(before, [r for r in changed.records if r.period < cutoff]):
            assert (a.period, a.tau, a.lambda_used, a.prediction) == (b.period, b.tau, b.lambda_used, b.prediction)
        after = [(r.prediction, s.prediction) for r, s in zip(original.records, changed.records) if r.period > cutoff]
        assert any(p != q for p, q in after)

    def test_same_seed_same_records(self, gdp_values):
        series = gdp_series(gdp_values)

        first = rolling_forecast(series, TAUS, config=self.CONFIG)
        second = rolling_forecast(series, TAUS, config=self.CONFIG)

        assert first.records == second.records
        assert summarize(first) == summarize(second)

    def test_include_next_period(self, gdp_values):
        series = gdp_series(gdp_values)

        result = rolling_forecast(series, TAUS, config=self.CONFIG, include_next=True)

        upcoming = result.next_period()
        assert [r.period for r in upcoming] == ["2000Q1"] * len(TAUS)
        assert all(r.realized is None and r.loss is None for r in upcoming)
        assert len(result.for_tau(0.5)) == 20

    def test_forecast_only_next_period(self, gdp_values):
        series = gdp_series(gdp_values)

        result = rolling_forecast(series, [0.5], config=self.CONFIG, start=len(series), include_next=True)

        assert [r.period for r in result.records] == ["2000Q1"]
        assert result.grid.values == LambdaGrid.for_sample_size(40).values

    def test_prior_proposal_runs(self):
        series = gdp_series(make_gdp_values(24, seed=2))
        config = SamplerConfig(B=5.0, n_samples=3000, proposal="prior", seed=3)

        result = rolling_forecast(series, [0.5], config=config)

        assert len(result.records) == 12
        assert all(np.isfinite(r.prediction) for r in result.records)


@pytest.mark.integration
@pytest.mark.slow
class TestSyntheticCoverage:
    """Coverage of tau-quantile forecasts for a bounded AR(1) with uniform innovations."""

    def test_coverage_close_to_tau(self):
        spec = SyntheticSpec(family="ar1_bounded", coeffs=(0.5,), innovation_bound=1.0, seed=2024, length=400)
        series = gen_synthetic(spec)
        config = SamplerConfig(B=5.0, n_samples=20_000, proposal_var=0.05, seed=8)

        result = rolling_forecast(series, TAUS, features=AutoregressiveFeatures(k=1), config=config)

        for tau in TAUS:
            assert abs(coverage_freq(result.for_tau(tau)) - tau) <= 0.1

"""Unit tests for priors, exact finite Gibbs aggregation, the pilot and the importance sampler."""

import math

import numpy as np
import pytest

from aggregator import (
    ImportanceSampler,
    ParamVector,
    PriorSpec,
    fit_pilot,
    gibbs_mean_finite,
    gibbs_weights_finite,
    importance_sample_gibbs,
    l1_ball_log_volume,
    pilot_fit,
    sample_uniform_l1_ball,
)
from losses import LossFn
from middleware.errors import CoverageError, DegenerateWeightsError, DomainError, InsufficientHistoryError
from series import GdpFeatures, gen_synthetic
from tests.conftest import THETA_STAR, gdp_series


@pytest.mark.unit
class TestPriors:
    """Tests for ParamVector, PriorSpec and L1-ball sampling."""

    def test_param_vector_is_frozen(self):
        theta = ParamVector([1.0, -2.0])

        assert theta.l1_norm == 3.0
        assert theta.in_ball(3.0) and not theta.in_ball(2.9)
        with pytest.raises(ValueError):
            theta.theta[0] = 0.0

    def test_param_vector_finite(self):
        with pytest.raises(DomainError):
            ParamVector([np.inf])

    def test_uniform_ball_draws_inside(self):
        draws = sample_uniform_l1_ball(np.random.default_rng(0), 2.5, 4, 20_000)

        assert draws.shape == (20_000, 4)
        assert np.all(np.sum(np.abs(draws), axis=1) <= 2.5)
        np.testing.assert_allclose(draws.mean(axis=0), 0.0, atol=0.03)

    def test_uniform_ball_radial_law(self):
        # for a uniform draw in a d-dimensional ball, P(||T|| <= r R) = r^d
        draws = sample_uniform_l1_ball(np.random.default_rng(1), 1.0, 3, 50_000)
        norms = np.sum(np.abs(draws), axis=1)

        assert np.mean(norms <= 0.5) == pytest.approx(0.5**3, abs=0.01)

    def test_l1_ball_volume(self):
        assert math.exp(l1_ball_log_volume(1.0, 2)) == pytest.approx(2.0)
        assert math.exp(l1_ball_log_volume(3.0, 1)) == pytest.approx(6.0)

    def test_finite_grid_validation(self):
        with pytest.raises(DomainError):
            PriorSpec.finite_grid([0.0, 1.0], [0.7, 0.7])
        with pytest.raises(DomainError):
            PriorSpec.uniform_l1_ball(0.0)

    def test_mixture_weights(self):
        first = PriorSpec.finite_grid([[0.0], [1.0]])
        second = PriorSpec.finite_grid([[5.0]])

        mixed = PriorSpec.mixture([first, second], [0.5, 0.5])

        np.testing.assert_allclose(mixed.weights, [0.25, 0.25, 0.5])
        assert mixed.points.shape == (3, 1)


@pytest.mark.unit
class TestGibbsFinite:
    """Tests for gibbs_weights_finite and gibbs_mean_finite."""

    def test_lambda_zero_returns_prior(self):
        prior = np.array([0.2, 0.3, 0.5])

        np.testing.assert_array_equal(gibbs_weights_finite(0.0, [1.0, 5.0, 2.0], prior), prior)

    def test_equal_risks(self):
        np.testing.assert_allclose(gibbs_weights_finite(3.0, [1.0, 1.0], [0.5, 0.5]), [0.5, 0.5])

    def test_log_three(self):
        np.testing.assert_allclose(gibbs_weights_finite(math.log(3.0), [0.0, 1.0], [0.5, 0.5]), [0.75, 0.25])

    def test_normalised(self):
        rng = np.random.default_rng(0)
        prior = rng.dirichlet(np.ones(50))

        w = gibbs_weights_finite(1e4, rng.uniform(0, 100, size=50), prior)

        assert abs(np.sum(w) - 1.0) < 1e-12
        assert np.all(np.isfinite(w))

    def test_shifting_risks_changes_nothing(self):
        risks = np.array([0.4, 1.3, 2.2])
        prior = np.array([0.5, 0.25, 0.25])

        np.testing.assert_allclose(
            gibbs_weights_finite(7.0, risks + 11.0, prior), gibbs_weights_finite(7.0, risks, prior), rtol=1e-12
        )

    def test_better_point_gains_weight_with_lambda(self):
        first = [gibbs_weights_finite(lam, [0.2, 0.5], [0.5, 0.5])[0] for lam in np.geomspace(1e-3, 1e4, 40)]

        assert all(b >= a for a, b in zip(first, first[1:]))

    def test_infinite_risk_gets_zero(self):
        w = gibbs_weights_finite(1.0, [np.inf, 0.0], [0.5, 0.5])

        np.testing.assert_array_equal(w, [0.0, 1.0])

    def test_all_infinite_is_degenerate(self):
        with pytest.raises(DegenerateWeightsError):
            gibbs_weights_finite(1.0, [np.inf, np.inf], [0.5, 0.5])

    def test_negative_lambda(self):
        with pytest.raises(DomainError):
            gibbs_weights_finite(-1.0, [0.0], [1.0])

    def test_symmetric_mean_is_zero(self):
        v = np.array([1.0, -2.0])

        mean = gibbs_mean_finite(0.0, np.stack([-v, v]), [3.0, 1.0], [0.5, 0.5])

        np.testing.assert_array_equal(mean.theta, [0.0, 0.0])

    def test_large_lambda_picks_argmin(self):
        points = np.array([[0.0], [1.0], [2.0]])

        mean = gibbs_mean_finite(1e6, points, [0.3, 0.1, 0.2], np.full(3, 1 / 3))

        assert mean.theta[0] == pytest.approx(1.0, abs=1e-6)

    def test_one_dimensional_points(self):
        mean = gibbs_mean_finite(math.log(3.0), [0.0, 1.0], [0.0, 1.0], [0.5, 0.5])

        assert mean.theta[0] == pytest.approx(0.25)


@pytest.mark.unit
class TestPilot:
    """Tests for fit_pilot / pilot_fit."""

    def test_exact_data_recovered(self, realizable_series):
        pilot = pilot_fit(0.5, realizable_series, GdpFeatures())

        np.testing.assert_allclose(pilot.theta.theta, THETA_STAR, atol=1e-8)
        assert abs(pilot.shift) < 1e-8
        assert pilot.flags == ()

    def test_symmetric_noise_median_shift(self):
        rng = np.random.default_rng(3)
        X = np.column_stack([np.ones(400), rng.normal(size=400)])
        y = X @ np.array([1.0, 2.0]) + rng.normal(size=400)

        pilot = fit_pilot(0.5, X, y)
        ols, *_ = np.linalg.lstsq(X, y, rcond=None)

        # se of the sample median of standard normal residuals is about 1.25 / sqrt(n)
        assert abs(pilot.shift) < 3 * 1.25 / math.sqrt(400)
        assert pilot.theta.theta[1] == ols[1]

    def test_constant_model_is_empirical_quantile(self):
        rng = np.random.default_rng(4)
        y = rng.normal(size=101)

        pilot = fit_pilot(0.25, np.ones((101, 1)), y)

        brute = min(y, key=lambda q: np.sum(np.where(y - q > 0, 0.25 * (y - q), -0.75 * (y - q))))
        assert pilot.theta.theta[0] == pytest.approx(brute, abs=1e-12)

    def test_rank_deficient_uses_ridge(self):
        X = np.column_stack([np.ones(10), np.ones(10)])

        pilot = fit_pilot(0.5, X, np.arange(10.0))

        assert pilot.ridge_fallback is True
        assert pilot.flags == ("ridge_fallback",)

    def test_needs_more_rows_than_parameters(self):
        with pytest.raises(InsufficientHistoryError):
            fit_pilot(0.5, np.ones((2, 2)), np.ones(2))


@pytest.mark.unit
class TestImportanceSampler:
    """Tests for ImportanceSampler and importance_sample_gibbs."""

    def test_same_seed_bit_identical(self, ar_spec):
        series = gen_synthetic(ar_spec)
        kwargs = dict(
            tau=0.5,
            lam=8.0,
            series=series,
            prior=PriorSpec.uniform_l1_ball(3.0),
            proposal_center=np.zeros(2),
            proposal_var=0.5,
            n_samples=5000,
            seed=17,
        )

        first = importance_sample_gibbs(**kwargs)
        second = importance_sample_gibbs(**kwargs)

        assert first == second
        assert first.ess == second.ess

    def test_workers_do_not_change_result(self, ar_spec):
        series = gen_synthetic(ar_spec)
        prior = PriorSpec.uniform_l1_ball(3.0)
        base = dict(tau=0.25, lam=16.0, series=series, prior=prior, proposal_center=[0.0, 0.4], proposal_var=0.3)

        single = importance_sample_gibbs(**base, n_samples=4000, seed=2, workers=1)
        pooled = importance_sample_gibbs(**base, n_samples=4000, seed=2, workers=3)

        assert single.theta_hat == pooled.theta_hat

    def test_outside_draws_weigh_nothing(self):
        sampler = ImportanceSampler(PriorSpec.uniform_l1_ball(1.0), dim=2, n_samples=2000, seed=0, variance=1.0)
        X = np.column_stack([np.ones(5), np.arange(5.0)])
        risks = sampler.risks(LossFn.quantile(0.5), X, np.arange(5.0))

        w = sampler.weights(2.0, risks)

        assert np.all(w[~sampler.inside] == 0.0)
        assert np.sum(w) == pytest.approx(1.0)
        assert 0.0 < sampler.mass_inside < 1.0

    def test_no_draw_inside_raises_coverage_error(self):
        sampler = ImportanceSampler(
            PriorSpec.uniform_l1_ball(1.0), dim=1, n_samples=50, seed=0, center=[50.0], variance=0.01
        )

        with pytest.raises(CoverageError) as excinfo:
            sampler.aggregate(1.0, np.empty(0))
        assert "recenter" in excinfo.value.message

    def test_lambda_zero_is_uniform_on_ball(self):
        # with lam = 0 the weights target the prior: E|T| for T uniform on [-R, R] is R/2
        sampler = ImportanceSampler(PriorSpec.uniform_l1_ball(1.0), dim=1, n_samples=100_000, seed=9, variance=0.25)
        w = sampler.weights(0.0, np.zeros(sampler.inside.sum()))
        abs_draws = np.abs(sampler.draws[:, 0])

        estimate = float(w @ abs_draws)
        ess = 1.0 / np.sum(w * w)
        se = np.sqrt(np.sum(w * w * (abs_draws - estimate) ** 2)) + 0.3 / np.sqrt(ess)

        assert abs(estimate - 0.5) < 3 * se

    def test_tiny_proposal_at_origin(self):
        sampler = ImportanceSampler(PriorSpec.uniform_l1_ball(5.0), dim=2, n_samples=10_000, seed=4, variance=1e-4)

        result = sampler.aggregate(0.0, np.zeros(sampler.inside.sum()))

        assert sampler.mass_inside == 1.0
        assert result.theta_hat.l1_norm <= np.max(np.sum(np.abs(sampler.draws), axis=1))

    def test_antithetic_pairs_cancel(self):
        sampler = ImportanceSampler(
            PriorSpec.uniform_l1_ball(10.0), dim=2, n_samples=1000, seed=1, center=[0.5, -0.5], antithetic=True
        )

        np.testing.assert_allclose(sampler.draws[:500] + sampler.draws[500:], [[1.0, -1.0]] * 500, atol=1e-12)
        result = sampler.aggregate(0.0, np.zeros(sampler.inside.sum()))
        np.testing.assert_allclose(result.theta_hat.theta, [0.5, -0.5], atol=1e-12)

    def test_low_ess_is_a_flag(self):
        sampler = ImportanceSampler(
            PriorSpec.uniform_l1_ball(5.0), dim=1, n_samples=1000, seed=3, proposal="prior", ess_floor=500
        )
        X = np.ones((100, 1))
        risks = sampler.risks(LossFn.absolute(), X, np.full(100, 2.0))

        result = sampler.aggregate(1000.0, risks)

        assert result.low_ess
        assert result.theta_hat.theta[0] == pytest.approx(2.0, abs=0.05)

    def test_running_risk_matches_batch(self):
        rng = np.random.default_rng(5)
        X = np.column_stack([np.ones(12), rng.normal(size=12)])
        y = rng.normal(size=12)
        sampler = ImportanceSampler(PriorSpec.uniform_l1_ball(3.0), dim=2, n_samples=3000, seed=6, proposal="prior")
        loss = LossFn.quantile(0.75)

        running = sampler.accumulator(loss)
        for i in range(12):
            running.update(X[i : i + 1], y[i : i + 1])

        np.testing.assert_allclose(running.risks, sampler.risks(loss, X, y), rtol=1e-12)

    def test_gdp_series_uses_gdp_regressors(self, gdp_values):
        series = gdp_series(gdp_values, bound_B=float(np.max(np.abs(gdp_values))))

        result = importance_sample_gibbs(
            0.5, 1.0, series, PriorSpec.uniform_l1_ball(101.0), np.zeros(4), 1.0, 1000, 0
        )

        assert result.theta_hat.theta.shape == (4,)
        assert np.all(np.isfinite(result.theta_hat.theta))

    def test_ar_series_uses_one_lag(self, ar_spec):
        result = importance_sample_gibbs(
            0.5, 1.0, gen_synthetic(ar_spec), PriorSpec.uniform_l1_ball(3.0), np.zeros(2), 0.5, 1000, 0
        )

        assert result.theta_hat.theta.shape == (2,)

    def test_rejects_non_ball_prior(self):
        with pytest.raises(DomainError):
            ImportanceSampler(PriorSpec.finite_grid([[0.0]]), dim=1, n_samples=10, seed=0)

    def test_finite_grid_crosscheck(self):
        # intercept-only predictor on a uniform 1-D prior; compare with the exact mean on a fine grid
        rng = np.random.default_rng(8)
        y = rng.uniform(-1, 1, size=40)
        X = np.ones((40, 1))
        radius = 2.0
        loss = LossFn.quantile(0.5)
        grid = np.linspace(-radius, radius, 201)
        grid_risks = np.array([np.mean(loss.evaluate(np.full(40, g), y)) for g in grid])
        sampler = ImportanceSampler(
            PriorSpec.uniform_l1_ball(radius), dim=1, n_samples=200_000, seed=10, proposal="prior"
        )
        risks = sampler.risks(loss, X, y)

        for lam in (1.0, 10.0, 100.0):
            exact = gibbs_mean_finite(lam, grid, grid_risks, np.full(201, 1 / 201)).theta[0]
            estimate = sampler.aggregate(lam, risks).theta_hat.theta[0]
            assert abs(estimate - exact) < 0.01


def _median_problem(seed: int = 8, n: int = 40):
    """Intercept-only median regression on uniform data, with a fine-grid oracle."""
    rng = np.random.default_rng(seed)
    y = rng.uniform(-1, 1, size=n)
    X = np.ones((n, 1))
    loss = LossFn.quantile(0.5)
    return X, y, loss


def _grid_mean(lam, loss, y, radius=2.0, points=201):
    grid = np.linspace(-radius, radius, points)
    risks = np.array([np.mean(loss.evaluate(np.full(y.size, g), y)) for g in grid])
    return gibbs_mean_finite(lam, grid, risks, np.full(points, 1 / points)).theta[0]


@pytest.mark.unit
@pytest.mark.slow
class TestSamplerAcceptance:
    """Importance sampling against the finite-grid oracle at full sample size."""

    def test_gaussian_proposal_matches_grid(self):
        X, y, loss = _median_problem()
        sampler = ImportanceSampler(
            PriorSpec.uniform_l1_ball(2.0), dim=1, n_samples=1_000_000, seed=10, center=[0.0], variance=1.0
        )
        risks = sampler.risks(loss, X, y)

        for lam in (1.0, 10.0, 100.0):
            estimate = sampler.aggregate(lam, risks).theta_hat.theta[0]
            assert abs(estimate - _grid_mean(lam, loss, y)) < 0.01

    def test_error_shrinks_with_sample_size(self):
        X, y, loss = _median_problem()
        exact = _grid_mean(10.0, loss, y, points=4001)
        prior = PriorSpec.uniform_l1_ball(2.0)

        def errors(n_samples):
            out = []
            for seed in range(20):
                sampler = ImportanceSampler(prior, dim=1, n_samples=n_samples, seed=seed, variance=1.0)
                estimate = sampler.aggregate(10.0, sampler.risks(loss, X, y)).theta_hat.theta[0]
                out.append(abs(estimate - exact))
            return float(np.median(out))

        assert errors(1_000_000) < errors(10_000)

"""Pytest configuration and shared fixtures for the gibbs-forecast tests."""

import os
import sys
from pathlib import Path

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[1]
APP_DIR = PROJECT_ROOT / "gibbs-forecast"

# packages are imported by name (series, losses, ...), as when running python -m cli
if str(APP_DIR) not in sys.path:
    sys.path.insert(0, str(APP_DIR))

from middleware.log import configure_logging  # noqa: E402
from series.timeseries import GDP_COLUMNS, TimeSeries, quarter_labels  # noqa: E402
from series.synthetic import SyntheticSpec  # noqa: E402

# coefficients of the noiseless GDP-format series: intercept, growth lag, climate lag, signed square
THETA_STAR = np.array([0.2, 0.3, 0.004, 0.01])


@pytest.fixture(autouse=True)
def quiet_logging():
    """CLI runs bind structlog to the runner's stderr; rebind to the current one for each test."""
    configure_logging("WARNING", "console")


@pytest.fixture
def temp_env_var():
    """Set environment variables for one test and restore the environment afterwards."""
    original_env = os.environ.copy()

    def _set_env(**kwargs):
        for key, value in kwargs.items():
            os.environ[key] = value

    yield _set_env

    os.environ.clear()
    os.environ.update(original_env)


# =============================================================================
# SERIES
# =============================================================================


def make_gdp_values(n: int, seed: int = 7) -> np.ndarray:
    rng = np.random.default_rng(seed)
    climate = 100.0 + np.cumsum(rng.normal(scale=1.5, size=n))
    growth = 0.5 + 0.1 * np.cumsum(rng.normal(scale=0.3, size=n)) + rng.normal(scale=0.3, size=n)
    return np.column_stack([growth, climate])


def make_realizable_values(n: int, theta=THETA_STAR, seed: int = 3) -> np.ndarray:
    """Growth follows the GDP regressor exactly: growth_t = x_t @ theta, no noise."""
    rng = np.random.default_rng(seed)
    climate = 100.0 + np.cumsum(rng.normal(scale=1.0, size=n))
    growth = np.zeros(n)
    growth[:2] = rng.uniform(-0.5, 0.5, size=2)
    for t in range(2, n):
        diff = climate[t - 1] - climate[t - 2]
        x = np.array([1.0, growth[t - 1], climate[t - 1], diff * abs(diff)])
        growth[t] = float(x @ theta)
    return np.column_stack([growth, climate])


def gdp_series(values: np.ndarray, start: str = "1990Q1", bound_B=None) -> TimeSeries:
    return TimeSeries(
        timestamps=tuple(quarter_labels(start, values.shape[0])),
        values=values,
        columns=GDP_COLUMNS,
        bound_B=bound_B,
    )


def write_gdp_csv(path: Path, values: np.ndarray, start: str = "1990Q1") -> Path:
    lines = ["period,gdp_growth,climate"]
    for label, (growth, climate) in zip(quarter_labels(start, values.shape[0]), values):
        lines.append(f"{label},{float(growth)!r},{float(climate)!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def gdp_values():
    return make_gdp_values(40)


@pytest.fixture
def gdp_csv(tmp_path, gdp_values):
    """A 40-quarter GDP-format CSV starting 1990Q1."""
    return write_gdp_csv(tmp_path / "gdp.csv", gdp_values)


@pytest.fixture
def realizable_series():
    return gdp_series(make_realizable_values(36))


@pytest.fixture
def ar_spec():
    """AR(1) with a = 0.5 and innovations on [-1, 1]: B = 2, C = 4."""
    return SyntheticSpec(family="ar1_bounded", coeffs=(0.5,), innovation_bound=1.0, seed=11, length=200)


@pytest.fixture
def iid_spec():
    return SyntheticSpec(family="ar1_bounded", coeffs=(0.0,), innovation_bound=1.0, seed=5, length=50)

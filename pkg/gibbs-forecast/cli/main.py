"""
gibbs-forecast command line.

    python -m cli [--config FILE] [--seed N] [--out DIR] COMMAND [OPTIONS]

Commands: forecast, backtest, simulate, verify. Exit codes: 0 success,
1 verification failure, 2 usage or data error. Errors are reported as one
JSON line on stderr; logs also go to stderr, artifacts to ``--out``.
"""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import click
import orjson

from forecaster import (
    SamplerConfig,
    format_reproduction_table,
    rearrange_bands,
    rolling_forecast,
    summarize,
)
from lab import VerifyBudget, run_verification
from middleware.errors import GibbsForecastError, VerificationFailure
from middleware.log import configure_logging, get_logger
from middleware.settings import Settings, load_settings
from series import SyntheticSpec, TimeSeries, align_climate, gen_synthetic, load_csv, load_monthly_csv, merge_climate, write_csv

from .artifacts import record_to_dict, write_fan_chart_csv, write_fan_chart_svg, write_json, write_records_csv
from .config import Command, RunConfig, load_run_config

logger = get_logger(__name__)


@dataclass
class CliState:
    settings: Settings
    config_path: Optional[str] = None
    globals: Dict[str, Any] = field(default_factory=dict)

    def run_config(self, command: Command, overrides: Dict[str, Any]) -> RunConfig:
        return load_run_config(command, self.config_path, {**self.globals, **overrides})

    def out_dir(self, config: RunConfig) -> str:
        return config.out or self.settings.out_dir


def reports_errors(func):
    """Turn library errors into a JSON line on stderr and the error's exit code."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except GibbsForecastError as exc:
            logger.debug("command_failed", error=type(exc).__name__)
            click.echo(orjson.dumps(exc.to_dict(), default=str, option=orjson.OPT_SERIALIZE_NUMPY).decode(), err=True)
            click.get_current_context().exit(exc.exit_code)

    return wrapper


def _parse_taus(ctx, param, value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")


def _parse_names(ctx, param, value: Optional[str]) -> Optional[List[str]]:
    if value is None:
        return None
    return [part.strip() for part in value.split(",") if part.strip()]


def _run_config_payload(config: RunConfig) -> Dict[str, Any]:
    return orjson.loads(config.fingerprint())


def _load_series(config: RunConfig) -> TimeSeries:
    config.require_files("data")
    series = load_csv(config.data, bound_B=config.bound_B)
    if config.climate is not None:
        config.require_files("climate")
        series = merge_climate(series, align_climate(load_monthly_csv(config.climate)))
        logger.info("climate_merged", path=config.climate, rows=len(series))
    return series


def _sampler_config(config: RunConfig, settings: Settings) -> SamplerConfig:
    return SamplerConfig(
        B=config.B,
        n_samples=config.samples,
        proposal_var=config.proposal_var,
        proposal=config.proposal,
        antithetic=config.antithetic,
        seed=config.seed,
        workers=settings.workers,
    )


# =============================================================================
# GROUP
# =============================================================================


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="YAML run configuration.")
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Master seed (unsigned 64-bit).")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory.")
@click.option("--log-level", default=None, help="Overrides GIBBS_LOG_LEVEL.")
@click.option("--log-format", type=click.Choice(["console", "json"]), default=None, help="Overrides GIBBS_LOG_FORMAT.")
@click.pass_context
def cli(ctx, config_path, seed, out, log_level, log_format):
    """Quantile forecasting with Gibbs aggregation, and checks of its oracle inequality."""
    settings, warnings = load_settings()
    configure_logging(log_level or settings.log_level, log_format or settings.log_format)
    for warning in warnings:
        logger.warning("settings_warning", detail=warning)
    ctx.obj = CliState(settings=settings, config_path=config_path, globals={"seed": seed, "out": out})


def _forecast_options(func):
    options = [
        click.option("--data", type=click.Path(dir_okay=False), default=None, help="Quarterly CSV."),
        click.option("--climate", type=click.Path(dir_okay=False), default=None, help="Monthly climate CSV to align."),
        click.option("--bound-B", "bound_B", type=float, default=None, help="Almost-sure bound of the data."),
        click.option("--taus", callback=_parse_taus, default=None, help="Comma-separated quantile levels."),
        click.option("--B", "B", type=float, default=None, help="Parameter radius (prior ball is B+1). Default 100."),
        click.option("--samples", type=int, default=None, help="Importance draws per tau. Default 100000."),
        click.option("--proposal-var", type=float, default=None, help="Gaussian proposal variance. Default 1.0."),
        click.option("--proposal", type=click.Choice(["gaussian", "prior"]), default=None),
        click.option("--antithetic/--no-antithetic", default=None, help="Pair every draw with its reflection."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _given(**values) -> Dict[str, Any]:
    return {key: value for key, value in values.items() if value is not None}


# =============================================================================
# COMMANDS
# =============================================================================


@cli.command()
@_forecast_options
@click.option("--start", default=None, help="First reported period (YYYYQn). Default: middle of the sample.")
@click.option("--plot/--no-plot", default=None, help="Also write fan_chart.svg.")
@click.pass_obj
@reports_errors
def backtest(state: CliState, **options):
    """Rolling out-of-sample quantile forecasts with online lambda selection."""
    config = state.run_config("backtest", _given(**options))
    series = _load_series(config)
    result = rolling_forecast(
        series,
        config.taus,
        config=_sampler_config(config, state.settings),
        start=config.start,
        progress=state.settings.progress,
    )
    out = state.out_dir(config)
    fingerprint = config.fingerprint()
    summary = summarize(result)

    write_records_csv(os.path.join(out, "forecasts.csv"), result.records, fingerprint)
    write_records_csv(os.path.join(out, "comparator.csv"), result.comparator, fingerprint)
    write_json(os.path.join(out, "summary.json"), {"run_config": _run_config_payload(config), "summary": summary})
    bands = rearrange_bands(result.records)
    write_fan_chart_csv(os.path.join(out, "fan_chart.csv"), bands, fingerprint)
    if config.plot:
        write_fan_chart_svg(os.path.join(out, "fan_chart.svg"), bands, fingerprint, title=f"from {result.start_period}")

    click.echo(format_reproduction_table(summary))
    logger.info("backtest_written", out=out, records=len(result.records))


@cli.command()
@_forecast_options
@click.pass_obj
@reports_errors
def forecast(state: CliState, **options):
    """Next-period tau-quantiles fitted on all available data."""
    config = state.run_config("forecast", _given(**options))
    series = _load_series(config)
    result = rolling_forecast(
        series,
        config.taus,
        config=_sampler_config(config, state.settings),
        start=len(series),
        include_next=True,
        progress=state.settings.progress,
    )
    out = state.out_dir(config)
    fingerprint = config.fingerprint()
    records = result.next_period()
    comparator = [r for r in result.comparator if not r.has_realized]
    band = rearrange_bands(records)

    write_records_csv(os.path.join(out, "forecast.csv"), records, fingerprint)
    write_json(
        os.path.join(out, "forecast.json"),
        {
            "run_config": _run_config_payload(config),
            "period": series.next_period(),
            "records": [record_to_dict(r) for r in records],
            "comparator": [record_to_dict(r) for r in comparator],
            "quantiles": {f"{tau:g}": value for tau, value in band[0].quantiles},
            "pilots": {f"{tau:g}": pilot.theta.tolist() for tau, pilot in result.pilots.items()},
        },
    )
    for tau, value in band[0].quantiles:
        click.echo(f"{series.next_period()}  q{tau:g} = {value:.6f}")


@cli.command()
@click.option("--a", "coeffs", type=float, multiple=True, help="AR coefficient; repeat for higher order.")
@click.option("--ma", "ma_coeffs", type=float, multiple=True, help="MA coefficient; repeat for higher order.")
@click.option("--b", "innovation_bound", type=float, default=None, help="Innovations are Uniform[-b, b].")
@click.option("--n", "length", type=int, default=None, help="Series length.")
@click.option("--dimension", type=int, default=None, help="Independent coordinates; 2 writes GDP-format data.")
@click.option("--burn-in", type=int, default=None)
@click.option("--start-period", default=None, help="Label of the first quarter (YYYYQn).")
@click.pass_obj
@reports_errors
def simulate(state: CliState, coeffs, ma_coeffs, **options):
    """Write a bounded, weakly dependent synthetic series as CSV."""
    section = _given(coeffs=list(coeffs) or None, ma_coeffs=list(ma_coeffs) or None, **options)
    config = state.run_config("simulate", {"simulate": section})
    params = config.simulate
    family = "ar1_bounded" if len(params.coeffs) == 1 and not params.ma_coeffs else "arma_bounded"
    spec = SyntheticSpec(
        family=family,
        coeffs=params.coeffs,
        innovation_bound=params.innovation_bound,
        seed=config.seed,
        length=params.length,
        ma_coeffs=params.ma_coeffs,
        dimension=params.dimension,
        burn_in=params.burn_in,
        start_period=params.start_period,
    )
    series = gen_synthetic(spec)
    path = write_csv(series, os.path.join(state.out_dir(config), "series.csv"), f"run_config={config.fingerprint()}")
    click.echo(path)
    logger.info("simulation_written", path=path, length=len(series), bound_B=series.bound_B)


@cli.command()
@click.option("--checks", callback=_parse_names, default=None, help="Subset of bounds,dv,rio,xiaoyin,oracle.")
@click.option("--epsilon", type=float, default=None, help="Confidence parameter. Default 0.1.")
@click.option("--oracle-replications", type=int, default=None)
@click.option("--rio-replications", type=int, default=None)
@click.pass_obj
@reports_errors
def verify(state: CliState, checks, epsilon, oracle_replications, rio_replications):
    """Run the lemma checks, bound arithmetic and the oracle-inequality replication."""
    section = _given(
        checks=checks, oracle_replications=oracle_replications, rio_replications=rio_replications
    )
    config = state.run_config("verify", _given(epsilon=epsilon, verify=section or None))
    budget = VerifyBudget(epsilon=config.epsilon, **config.verify.model_dump())
    report = run_verification(budget, config.seed, workers=state.settings.workers, progress=state.settings.progress)

    write_json(
        os.path.join(state.out_dir(config), "verify_report.json"),
        {"run_config": _run_config_payload(config), "report": report.to_dict()},
    )
    for item in report.items:
        click.echo(f"{item.status.value:<12} {item.check:<20} {item.name}")
    click.echo(f"overall: {report.status.value}")
    if report.hard_failures:
        raise VerificationFailure(
            f"{len(report.hard_failures)} check(s) failed",
            failed=[f"{item.check}: {item.name}" for item in report.hard_failures],
        )


def main() -> None:
    cli(prog_name="gibbs-forecast")

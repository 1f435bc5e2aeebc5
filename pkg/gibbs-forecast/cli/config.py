"""
Run configuration for every command.

Layers, lowest precedence first: model defaults, ``config/default.yaml``, the
file given with ``--config``, then command-line flags. The validated model is
serialised into every artifact (``fingerprint``); feeding that JSON back through
``--config`` reproduces the artifact.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple

import orjson
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from middleware.errors import ConfigurationError, DataError

Command = Literal["forecast", "backtest", "simulate", "verify"]

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parents[1] / "config" / "default.yaml"
MAX_SEED = 2**64 - 1


class SimulateSection(BaseModel):
    """Bounded ARMA generator behind ``simulate``."""

    model_config = ConfigDict(extra="forbid")

    coeffs: Tuple[float, ...] = Field(default=(0.5,), description="AR coefficients a_1..a_p")
    ma_coeffs: Tuple[float, ...] = Field(default=(), description="MA coefficients c_1..c_q")
    innovation_bound: float = Field(default=1.0, description="innovations are Uniform[-b, b]")
    length: int = Field(default=400, ge=1)
    dimension: int = Field(default=1, ge=1, description="2 writes GDP-format columns")
    burn_in: int = Field(default=0, ge=0)
    start_period: str = "2000Q1"


class VerifySection(BaseModel):
    """Monte Carlo budget of ``verify``; mirrors lab.VerifyBudget."""

    model_config = ConfigDict(extra="forbid")

    checks: Tuple[Literal["bounds", "dv", "rio", "xiaoyin", "oracle"], ...] = (
        "bounds",
        "dv",
        "rio",
        "xiaoyin",
        "oracle",
    )
    ar_coeff: float = 0.5
    innovation_bound: float = 1.0
    dv_instances: int = Field(default=100, ge=1)
    dv_max_support: int = Field(default=50, ge=1)
    rio_n: int = Field(default=50, ge=1)
    rio_t_grid: Tuple[float, ...] = (0.0, 0.05, 0.1, 0.2)
    rio_replications: int = Field(default=100_000, ge=2)
    xiaoyin_n: int = Field(default=100, ge=3)
    xiaoyin_lambdas: Tuple[float, ...] = (0.5, 2.0)
    xiaoyin_replications: int = Field(default=20_000, ge=2)
    xiaoyin_theta: Tuple[float, ...] = (0.0, 0.5)
    oracle_n: int = Field(default=400, ge=3)
    oracle_B: float = Field(default=1.0, gt=0)
    oracle_taus: Tuple[float, ...] = (0.25, 0.5, 0.75)
    oracle_replications: int = Field(default=200, ge=1)
    oracle_samples: int = Field(default=20_000, ge=1)
    oracle_holdout: int = Field(default=100_000, ge=100)
    gdp_B: float = Field(default=100.0, gt=0)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: Optional[Command] = None
    data: Optional[str] = Field(default=None, description="quarterly CSV (period,<columns>)")
    climate: Optional[str] = Field(default=None, description="monthly climate CSV (month,value)")
    bound_B: Optional[float] = Field(default=None, description="a.s. bound of the data; empirical when unset")
    taus: Tuple[float, ...] = (0.05, 0.25, 0.5, 0.75, 0.95)
    B: float = Field(default=100.0, description="prior radius is B + 1")
    samples: int = Field(default=100_000, description="importance draws N per tau")
    proposal_var: float = Field(default=1.0, description="Gaussian proposal variance v")
    proposal: Literal["gaussian", "prior"] = "gaussian"
    antithetic: bool = False
    start: Optional[str] = Field(default=None, description="first reported period, YYYYQn")
    plot: bool = False
    seed: int = 0
    epsilon: float = 0.1
    out: Optional[str] = Field(default=None, description="output directory; not part of the fingerprint")
    simulate: SimulateSection = Field(default_factory=SimulateSection)
    verify: VerifySection = Field(default_factory=VerifySection)

    @field_validator("taus")
    @classmethod
    def _sorted_taus(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not value:
            raise ValueError("at least one tau is required")
        if any(not 0.0 < t < 1.0 for t in value):
            raise ValueError(f"every tau must lie in (0, 1), got {list(value)}")
        return tuple(sorted(set(value)))

    @field_validator("B", "proposal_var")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError(f"must be > 0, got {value}")
        return value

    @field_validator("bound_B")
    @classmethod
    def _positive_bound(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not value > 0:
            raise ValueError(f"must be > 0, got {value}")
        return value

    @field_validator("samples")
    @classmethod
    def _at_least_one(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be >= 1, got {value}")
        return value

    @field_validator("epsilon")
    @classmethod
    def _open_unit(cls, value: float) -> float:
        if not 0.0 < value < 1.0:
            raise ValueError(f"must lie in (0, 1), got {value}")
        return value

    @field_validator("seed")
    @classmethod
    def _u64(cls, value: int) -> int:
        if not 0 <= value <= MAX_SEED:
            raise ValueError(f"must be an unsigned 64-bit integer, got {value}")
        return value

    def fingerprint(self) -> str:
        """Canonical JSON (sorted keys) of everything that shapes a result."""
        return orjson.dumps(self.model_dump(mode="json", exclude={"out"}), option=orjson.OPT_SORT_KEYS).decode()

    def require_files(self, *names: str) -> None:
        for name in names:
            path = getattr(self, name)
            if path is None:
                raise ConfigurationError(f"{self.command} needs --{name}", option=name)
            if not os.path.isfile(path):
                raise DataError(f"file not found: {path}", path=path)


# =============================================================================
# LAYERING
# =============================================================================


def _read_yaml(path: Path) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as handle:
            loaded = yaml.safe_load(handle)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: not valid YAML ({exc})", path=str(path)) from exc
    if loaded is None:
        return {}
    if not isinstance(loaded, dict):
        raise ConfigurationError(f"{path}: top level must be a mapping", path=str(path))
    return loaded


def merge_layers(base: Mapping[str, Any], overlay: Mapping[str, Any]) -> Dict[str, Any]:
    """Overlay wins key by key; nested sections merge, ``None`` never overrides."""
    merged = dict(base)
    for key, value in overlay.items():
        if value is None:
            continue
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = merge_layers(merged[key], value)
        else:
            merged[key] = value
    return merged


def _validation_messages(exc: ValidationError) -> List[str]:
    return [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()]


def load_run_config(
    command: Command,
    config_path: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    defaults_path: Optional[Path] = DEFAULT_CONFIG_PATH,
) -> RunConfig:
    layers: Dict[str, Any] = {}
    if defaults_path is not None and Path(defaults_path).is_file():
        layers = merge_layers(layers, _read_yaml(Path(defaults_path)))
    if config_path is not None:
        if not os.path.isfile(config_path):
            raise ConfigurationError(f"config file not found: {config_path}", path=config_path)
        layers = merge_layers(layers, _read_yaml(Path(config_path)))
    layers = merge_layers(layers, overrides or {})
    layers["command"] = command
    try:
        return RunConfig.model_validate(layers)
    except ValidationError as exc:
        messages = _validation_messages(exc)
        raise ConfigurationError("invalid run configuration: " + "; ".join(messages), errors=messages) from exc

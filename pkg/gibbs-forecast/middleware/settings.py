"""
Ambient settings read from the environment (and an optional ``.env`` file).

These govern logging, output location and parallelism only; everything that
shapes a result lives in ``cli.config.RunConfig`` so artifacts stay reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

from dotenv import load_dotenv
from environs import Env

_LOG_FORMATS = ("console", "json")


@dataclass(frozen=True)
class Settings:
    log_level: str = "INFO"
    log_format: str = "console"
    out_dir: str = "out"
    workers: int = 1
    progress: bool = True
    testing: bool = False


def load_settings(dotenv: bool = True) -> Tuple[Settings, List[str]]:
    """Read GIBBS_* env config and return settings + warnings (never raises)."""
    if dotenv:
        load_dotenv()
    env = Env()
    warnings: List[str] = []
    defaults = Settings()

    def _read(reader, name: str, default):
        try:
            return reader(name, default)
        except Exception:
            warnings.append(f"{name} is set but could not be parsed; using {default!r}.")
            return default

    log_level = _read(env.str, "GIBBS_LOG_LEVEL", defaults.log_level).upper()
    log_format = _read(env.str, "GIBBS_LOG_FORMAT", defaults.log_format).lower()
    if log_format not in _LOG_FORMATS:
        warnings.append(f"GIBBS_LOG_FORMAT={log_format!r} is not one of {_LOG_FORMATS}; using 'console'.")
        log_format = "console"

    workers = _read(env.int, "GIBBS_WORKERS", defaults.workers)
    if workers < 1:
        warnings.append("GIBBS_WORKERS must be >= 1; using 1.")
        workers = 1

    testing = _read(env.bool, "TESTING", False)
    progress = _read(env.bool, "GIBBS_PROGRESS", defaults.progress) and not testing

    settings = Settings(
        log_level=log_level,
        log_format=log_format,
        out_dir=_read(env.str, "GIBBS_OUT_DIR", defaults.out_dir),
        workers=workers,
        progress=progress,
        testing=testing,
    )
    return settings, warnings

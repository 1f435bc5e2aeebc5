"""Command-line surface: run configuration, artifact writers and the click group."""

from .config import RunConfig, load_run_config
from .main import cli, main

__all__ = ["RunConfig", "load_run_config", "cli", "main"]

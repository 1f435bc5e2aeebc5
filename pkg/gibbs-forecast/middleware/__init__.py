"""Cross-cutting concerns: settings, structured logging, errors."""

from .errors import GibbsForecastError
from .log import configure_logging, get_logger
from .settings import Settings, load_settings

__all__ = ["GibbsForecastError", "configure_logging", "get_logger", "Settings", "load_settings"]

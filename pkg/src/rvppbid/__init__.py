"""Robust sequential-market bidding for renewable-only virtual power plants."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .domain import CaseConfig, ConfigError, load_case, validate_case  # noqa: E402

__all__ = ["CaseConfig", "ConfigError", "__version__", "load_case", "validate_case"]

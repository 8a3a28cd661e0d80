"""Config module for the application."""
from .config import (
    Config,
    dump_experiment_config,
    load_experiment_config,
    logger,
    parse_experiment_config,
)

__all__ = [
    "Config",
    "logger",
    "load_experiment_config",
    "parse_experiment_config",
    "dump_experiment_config",
]

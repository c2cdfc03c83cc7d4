"""TOML-based configuration for edffs.

Loads settings from a TOML file (default ``~/.edffs/config.toml``) and
provides typed dataclass access to all configuration sections.
"""

from __future__ import annotations

import logging
import os
import tomllib
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from edffs.constants import (
    DEFAULT_ADEQUATE_LEVEL,
    DEFAULT_CROSSOVER_GRID,
    DEFAULT_MUTATION_GRID,
    DEFAULT_ORACLE_MAX_PENDING,
    DEFAULT_ORACLE_MAX_SEARCH_SPACE,
    DEFAULT_ORACLE_TIME_BUDGET_SECONDS,
    DEFAULT_RS_RATIOS,
    DEFAULT_RUNS,
    DEFAULT_SEED,
    DEFAULT_WT_GRID,
)
from edffs.ga.config import GAConfig

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_DIR = Path("~/.edffs").expanduser()
DEFAULT_CONFIG_PATH = DEFAULT_CONFIG_DIR / "config.toml"

#: Environment variable consulted for the worker count when --threads is absent.
THREADS_ENV_VAR = "EDFFS_THREADS"


@dataclass
class OracleConfig:
    """Caps on the exact solver."""

    max_pending: int = DEFAULT_ORACLE_MAX_PENDING
    max_search_space: int = DEFAULT_ORACLE_MAX_SEARCH_SPACE
    time_budget: float = DEFAULT_ORACLE_TIME_BUDGET_SECONDS


@dataclass
class ExperimentConfig:
    """Defaults for the repeated-run commands."""

    runs: int = DEFAULT_RUNS
    seed: int = DEFAULT_SEED
    rs_ratios: list[float] = field(default_factory=lambda: list(DEFAULT_RS_RATIOS))
    wt_grid: list[float] = field(default_factory=lambda: list(DEFAULT_WT_GRID))
    crossover_grid: list[float] = field(default_factory=lambda: list(DEFAULT_CROSSOVER_GRID))
    mutation_grid: list[float] = field(default_factory=lambda: list(DEFAULT_MUTATION_GRID))
    adequate_level: float = DEFAULT_ADEQUATE_LEVEL

    def seeds(self, runs: int | None = None, first: int | None = None) -> list[int]:
        """Consecutive seeds; *runs* and *first* override ``runs`` and ``seed``."""
        first = self.seed if first is None else first
        return list(range(first, first + (self.runs if runs is None else runs)))


@dataclass
class AppConfig:
    """Top-level application configuration, one attribute per TOML section.

    ``ga`` is a frozen :class:`~edffs.ga.config.GAConfig`; the loader replaces
    it wholesale rather than setting attributes on it.
    """

    ga: GAConfig = field(default_factory=GAConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    log_level: str = "INFO"
    threads: int = 0
    template_dir: str = ""


def _apply_section(dc: Any, data: dict[str, Any], section: str) -> None:
    """Apply dict values onto a dataclass, ignoring unknown keys.

    Args:
        dc: The section dataclass instance to populate.
        data: The raw TOML table for that section.
        section: Table name, for the warning about an unknown key.
    """
    known = {f.name for f in fields(dc)}
    for key, value in data.items():
        if key in known:
            setattr(dc, key, value)
        else:
            logger.warning("Ignoring unknown config key %r in [%s]", key, section)


def load_config(path: str | Path | None = None) -> AppConfig:
    """Load configuration from a TOML file.

    Falls back to defaults if the file doesn't exist.

    Raises:
        GAConfigError: If the ``[ga]`` section describes an impossible run.
    """
    config = AppConfig()

    if path is None:
        path = DEFAULT_CONFIG_PATH
    path = Path(path).expanduser()

    if not path.exists():
        logger.info("Config file not found at %s, using defaults", path)
        return config

    logger.info("Loading config from %s", path)
    with open(path, "rb") as f:
        raw = tomllib.load(f)

    for key, value in raw.get("general", {}).items():
        if key in ("log_level", "threads", "template_dir"):
            setattr(config, key, value)
        else:
            logger.warning("Ignoring unknown config key %r in [general]", key)

    if "ga" in raw:
        config.ga = GAConfig.from_dict(raw["ga"])

    section_map = {
        "oracle": config.oracle,
        "experiment": config.experiment,
    }
    for section_name, dc in section_map.items():
        if section_name in raw:
            _apply_section(dc, raw[section_name], section_name)

    for section_name in raw:
        if section_name not in ("general", "ga", *section_map):
            logger.warning("Ignoring unknown config section [%s]", section_name)

    return config


def resolve_threads(cli_threads: int | None, config: AppConfig) -> int:
    """Worker count: the CLI flag, then the environment, then config, then the core count.

    A value of 0 anywhere in the chain means "use every available core".
    """
    if cli_threads:
        return cli_threads
    env = os.environ.get(THREADS_ENV_VAR, "").strip()
    if env:
        try:
            if int(env) > 0:
                return int(env)
        except ValueError:
            logger.warning("Ignoring non-integer %s=%r", THREADS_ENV_VAR, env)
    if config.threads > 0:
        return config.threads
    return os.cpu_count() or 1


def write_default_config(path: str | Path | None = None) -> Path:
    """Write a default config file if one doesn't exist. Returns the path."""
    if path is None:
        path = DEFAULT_CONFIG_PATH
    path = Path(path).expanduser()

    if path.exists():
        return path

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(DEFAULT_CONFIG_TOML, encoding="utf-8")
    logger.info("Created default config: %s", path)
    return path


DEFAULT_CONFIG_TOML = """\
[general]
log_level = "INFO"
# Worker processes for the engines; 0 uses every available core.
# EDFFS_THREADS and --threads take precedence.
threads = 0
# template_dir = "~/.edffs/templates"

[ga]
grid_w = 64
grid_h = 64
island_w = 8
island_h = 8
crossover_rate = 0.9
mutation_rate = 0.1
migration_interval = 10
generations = 100
seed = 1

[oracle]
# The exact solver refuses problems beyond these caps.
max_pending = 8
max_search_space = 2000000
time_budget = 600.0

[experiment]
runs = 30
seed = 1
rs_ratios = [0.2, 0.4, 0.6, 0.8]
wt_grid = [0.01, 0.1, 0.4, 0.7, 1.0, 4.0, 7.0, 10.0, 100.0]
# Rates the sweep command tries, every crossover rate with every mutation rate.
crossover_grid = [0.75, 0.825, 0.9]
mutation_grid = [0.05, 0.1, 0.15]
# A run counts as adequate when its best objective falls below this level.
adequate_level = 200.0
"""

"""Engine parameters and the record an engine run leaves behind."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from edffs.constants import (
    DEFAULT_CROSSOVER_RATE,
    DEFAULT_GENERATIONS,
    DEFAULT_GRID_HEIGHT,
    DEFAULT_GRID_WIDTH,
    DEFAULT_ISLAND_HEIGHT,
    DEFAULT_ISLAND_WIDTH,
    DEFAULT_MIGRATION_INTERVAL,
    DEFAULT_MUTATION_RATE,
    DEFAULT_SEED,
    EMAX_POLICY_POWER_OF_TEN,
    TOURNAMENT_SIZE,
)
from edffs.encoding import Chromosome
from edffs.model import Objective

logger = logging.getLogger(__name__)


class GAConfigError(ValueError):
    """Engine parameters that cannot describe a run."""


@dataclass(frozen=True)
class GAConfig:
    """Parameters shared by the hybrid engine and both baselines.

    The population is a ``grid_w x grid_h`` grid tiled into
    ``island_w x island_h`` islands. The baselines use the same population size
    and ignore the island tiling.
    """

    grid_w: int = DEFAULT_GRID_WIDTH
    grid_h: int = DEFAULT_GRID_HEIGHT
    island_w: int = DEFAULT_ISLAND_WIDTH
    island_h: int = DEFAULT_ISLAND_HEIGHT
    crossover_rate: float = DEFAULT_CROSSOVER_RATE
    mutation_rate: float = DEFAULT_MUTATION_RATE
    migration_interval: int = DEFAULT_MIGRATION_INTERVAL
    generations: int = DEFAULT_GENERATIONS
    seed: int = DEFAULT_SEED
    emax_policy: str = EMAX_POLICY_POWER_OF_TEN
    tournament: int = TOURNAMENT_SIZE

    def __post_init__(self) -> None:
        for name in ("grid_w", "grid_h", "island_w", "island_h", "migration_interval"):
            if getattr(self, name) < 1:
                raise GAConfigError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.generations < 0:
            raise GAConfigError(f"generations cannot be negative, got {self.generations}")
        if self.grid_w % self.island_w or self.grid_h % self.island_h:
            raise GAConfigError(
                f"island {self.island_w}x{self.island_h} does not tile grid "
                f"{self.grid_w}x{self.grid_h}"
            )
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise GAConfigError(f"{name} must lie in [0, 1], got {getattr(self, name)}")
        if self.emax_policy != EMAX_POLICY_POWER_OF_TEN:
            raise GAConfigError(
                f"unknown emax_policy {self.emax_policy!r} (known: {EMAX_POLICY_POWER_OF_TEN})"
            )
        if self.tournament != TOURNAMENT_SIZE:
            raise GAConfigError(
                f"only the {TOURNAMENT_SIZE}-cell neighbourhood tournament is supported"
            )

    @property
    def population_size(self) -> int:
        return self.grid_w * self.grid_h

    @property
    def islands_across(self) -> int:
        return self.grid_w // self.island_w

    @property
    def islands_down(self) -> int:
        return self.grid_h // self.island_h

    @property
    def island_count(self) -> int:
        return self.islands_across * self.islands_down

    def with_overrides(self, **overrides: Any) -> GAConfig:
        """Copy with every non-None override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any], base: GAConfig | None = None) -> GAConfig:
        """Build a config from a mapping, ignoring keys that are not fields.

        Args:
            data: Field values; an unknown key is warned about by name.
            base: Defaults for fields *data* leaves out.
        """
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                logger.warning("Ignoring unknown GA config key %r", key)
        values = {k: v for k, v in data.items() if k in known}
        return replace(base or cls(), **values)


def load_ga_config(path: str | Path, base: GAConfig | None = None) -> GAConfig:
    """Read a GAConfig JSON file.

    Raises:
        GAConfigError: If the file is not a JSON object or a value is invalid.
    """
    path = Path(path).expanduser()
    data = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise GAConfigError(f"{path} does not hold a JSON object")
    logger.info("Loaded GA config from %s", path)
    return GAConfig.from_dict(data, base=base)


@dataclass(frozen=True)
class TraceRow:
    generation: int
    best_objective: float
    mean_objective: float


@dataclass
class RunTrace:
    """What one engine run did, generation by generation.

    Attributes:
        engine: ``hybrid``, ``classical``, ``cellular`` or ``oracle``.
        rows: One row per generation, generation 0 being the initial population.
            ``best_objective`` is the best value found so far.
        e_max: The fitness ceiling calibrated from the initial population.
        best_chromosome: The best chromosome found, None when nothing was pending.
        best_objective: Objective of the returned schedule.
    """

    engine: str
    rows: list[TraceRow] = field(default_factory=list)
    e_max: float = 0.0
    best_chromosome: Chromosome | None = None
    best_objective: Objective | None = None

    def record(self, generation: int, best: float, mean: float) -> None:
        self.rows.append(TraceRow(generation, float(best), float(mean)))

    @property
    def best_values(self) -> list[float]:
        return [row.best_objective for row in self.rows]

    def best_at(self, generation: int) -> float:
        """Best-so-far objective after *generation* (clamped to the last row)."""
        if not self.rows:
            raise ValueError("empty trace")
        eligible = [row for row in self.rows if row.generation <= generation]
        return (eligible[-1] if eligible else self.rows[0]).best_objective

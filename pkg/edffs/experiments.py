"""Repeated-run experiments: engine benchmark, parameter grid and WT sweep."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from edffs.constants import DEFAULT_ADEQUATE_LEVEL, DEFAULT_CHECKPOINTS
from edffs.encoding import static_context
from edffs.ga import GAConfig, RunTrace, run_engine
from edffs.model import Instance, evaluate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchRow:
    """One engine at one generation checkpoint, over all seeds."""

    engine: str
    generation: int
    mean_objective: float
    best_objective: float
    adequate_rate: float


@dataclass
class BenchReport:
    adequate_level: float
    rows: list[BenchRow] = field(default_factory=list)
    traces: dict[str, list[RunTrace]] = field(default_factory=dict)

    def row(self, engine: str, generation: int) -> BenchRow:
        for row in self.rows:
            if row.engine == engine and row.generation == generation:
                return row
        raise KeyError((engine, generation))

    def to_dict(self) -> dict[str, Any]:
        return {
            "adequate_level": self.adequate_level,
            "rows": [asdict(row) for row in self.rows],
        }


def benchmark(
    instance: Instance,
    engines: Sequence[str],
    seeds: Sequence[int],
    config: GAConfig,
    checkpoints: Sequence[int] = DEFAULT_CHECKPOINTS,
    adequate_level: float = DEFAULT_ADEQUATE_LEVEL,
    workers: int = 1,
) -> BenchReport:
    """Run every engine once per seed and summarize the traces at each checkpoint.

    Every run lasts ``max(checkpoints)`` generations. A run counts as adequate at
    a checkpoint when its best objective so far is below *adequate_level*.
    """
    if not seeds:
        raise ValueError("benchmark needs at least one seed")
    checkpoints = sorted(checkpoints)
    run_config = config.with_overrides(generations=checkpoints[-1])
    context = static_context(instance)
    report = BenchReport(adequate_level=adequate_level)

    for engine in engines:
        traces = []
        for seed in seeds:
            _, trace = run_engine(
                engine, instance, context, run_config.with_overrides(seed=seed), workers
            )
            traces.append(trace)
        report.traces[engine] = traces
        for generation in checkpoints:
            values = np.array([trace.best_at(generation) for trace in traces])
            report.rows.append(
                BenchRow(
                    engine=engine,
                    generation=generation,
                    mean_objective=float(values.mean()),
                    best_objective=float(values.min()),
                    adequate_rate=float((values < adequate_level).mean()),
                )
            )
        logger.info(
            "%s: mean best %.3f after %d generations over %d seeds",
            engine,
            report.rows[-1].mean_objective,
            checkpoints[-1],
            len(seeds),
        )
    return report


@dataclass(frozen=True)
class SweepCell:
    crossover_rate: float
    mutation_rate: float
    mean_objective: float


def parameter_sweep(
    instance: Instance,
    crossover_rates: Sequence[float],
    mutation_rates: Sequence[float],
    seeds: Sequence[int],
    config: GAConfig,
    workers: int = 1,
    engine: str = "hybrid",
) -> list[SweepCell]:
    """Mean best objective for every (crossover rate, mutation rate) pair."""
    context = static_context(instance)
    cells = []
    for crossover_rate in crossover_rates:
        for mutation_rate in mutation_rates:
            values = []
            for seed in seeds:
                run_config = config.with_overrides(
                    crossover_rate=crossover_rate, mutation_rate=mutation_rate, seed=seed
                )
                schedule, _ = run_engine(engine, instance, context, run_config, workers)
                values.append(evaluate(instance, schedule).value)
            cells.append(SweepCell(crossover_rate, mutation_rate, float(np.mean(values))))
            logger.info(
                "crossover %.3f mutation %.3f: mean %.3f",
                crossover_rate,
                mutation_rate,
                cells[-1].mean_objective,
            )
    return cells


@dataclass(frozen=True)
class WTRow:
    wt: float
    mean_tardiness: float
    mean_makespan: float
    mean_objective: float


@dataclass
class WTSweepReport:
    """How the two objectives respond to the tardiness weight.

    The variances are sample variances of the per-WT means, 0 for a single WT.
    """

    rows: list[WTRow] = field(default_factory=list)

    def _variance(self, column: str) -> float:
        if len(self.rows) < 2:
            return 0.0
        return float(np.var([getattr(row, column) for row in self.rows], ddof=1))

    @property
    def tardiness_variance(self) -> float:
        return self._variance("mean_tardiness")

    @property
    def makespan_variance(self) -> float:
        return self._variance("mean_makespan")

    def to_dict(self) -> dict[str, Any]:
        return {
            "rows": [asdict(row) for row in self.rows],
            "tardiness_variance": self.tardiness_variance,
            "makespan_variance": self.makespan_variance,
        }


def wt_sweep(
    instance: Instance,
    wt_values: Sequence[float],
    seeds: Sequence[int],
    config: GAConfig,
    workers: int = 1,
    engine: str = "hybrid",
) -> WTSweepReport:
    """Solve *instance* under each tardiness weight and average over *seeds*."""
    report = WTSweepReport()
    for wt in wt_values:
        weighted = instance.with_wt(wt)
        context = static_context(weighted)
        objectives = []
        for seed in seeds:
            schedule, _ = run_engine(
                engine, weighted, context, config.with_overrides(seed=seed), workers
            )
            objectives.append(evaluate(weighted, schedule))
        report.rows.append(
            WTRow(
                wt=float(wt),
                mean_tardiness=float(np.mean([o.total_tardiness for o in objectives])),
                mean_makespan=float(np.mean([o.makespan for o in objectives])),
                mean_objective=float(np.mean([o.value for o in objectives])),
            )
        )
        logger.info("wt=%g: mean objective %.3f", wt, report.rows[-1].mean_objective)
    return report

"""Genetic engines over the shared chromosome and decoder."""

from __future__ import annotations

from collections.abc import Callable

from edffs.encoding import ReschedulingContext
from edffs.ga.baselines import cellular_ga, classical_ga
from edffs.ga.config import GAConfig, GAConfigError, RunTrace, TraceRow, load_ga_config
from edffs.ga.hybrid import evolve
from edffs.model import Instance, Schedule

Engine = Callable[[Instance, ReschedulingContext, GAConfig, int], tuple[Schedule, RunTrace]]

ENGINES: dict[str, Engine] = {
    "hybrid": evolve,
    "classical": classical_ga,
    "cellular": cellular_ga,
}


def run_engine(
    name: str,
    instance: Instance,
    context: ReschedulingContext,
    config: GAConfig,
    workers: int = 1,
) -> tuple[Schedule, RunTrace]:
    """Run the engine registered under *name*.

    Raises:
        ValueError: If no engine has that name.
    """
    try:
        engine = ENGINES[name]
    except KeyError:
        raise ValueError(f"unknown engine {name!r} (known: {', '.join(ENGINES)})") from None
    return engine(instance, context, config, workers)


__all__ = [
    "ENGINES",
    "GAConfig",
    "GAConfigError",
    "RunTrace",
    "TraceRow",
    "cellular_ga",
    "classical_ga",
    "evolve",
    "load_ga_config",
    "run_engine",
]

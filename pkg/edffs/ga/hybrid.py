"""The hybrid engine: fine-grained cellular GAs on islands joined in a ring.

The population grid is cut into island tiles. Inside an island every cell runs
a local tournament over its five-cell neighbourhood, neighbouring cells pair up
for crossover, and the island's best-ever individual is kept by elitist
replacement. Every ``migration_interval`` generations each island sends its
best individual to the next island in the ring.

Between migrations islands do not interact, so an island evolves a whole
epoch (``migration_interval`` generations) as one task. Each island owns its
random stream and takes it along, which makes the outcome independent of how
many processes run the epochs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from edffs.constants import ISLAND_STREAM_KEY
from edffs.encoding import Chromosome, ReschedulingContext, random_chromosome
from edffs.ga.config import GAConfig, RunTrace
from edffs.ga.evaluation import Evaluator, Individual, WorkerPool
from edffs.ga.operators import (
    calibrate_emax,
    crossover_pair,
    migrate_ring,
    mutate,
    rank,
    replace_elitist,
    select_asteroid,
)
from edffs.model import Instance, Schedule, evaluate

logger = logging.getLogger(__name__)


@dataclass
class Island:
    """A ``width x height`` tile of the population, cells in row-major order.

    Attributes:
        index: Position in the ring (row-major over the island grid).
        best: Best individual this island has ever held.
        rng: The island's own random stream.
    """

    index: int
    width: int
    height: int
    cells: list[Individual]
    rng: np.random.Generator
    best: Individual | None = None

    @property
    def size(self) -> int:
        return self.width * self.height

    def objective_sum(self) -> float:
        return sum(cell.objective for cell in self.cells)


@dataclass
class Population:
    """All islands of a run, laid out over the island grid."""

    islands: list[Island]
    e_max: float

    @property
    def size(self) -> int:
        return sum(island.size for island in self.islands)

    def best(self) -> Individual:
        """Best-ever individual over all islands; lowest island index on ties."""
        return min((island.best for island in self.islands), key=lambda ind: ind.objective)

    def mean_objective(self) -> float:
        return sum(island.objective_sum() for island in self.islands) / self.size


@dataclass
class EpochResult:
    """An island after an epoch and its per-generation statistics."""

    island: Island
    best: list[float] = field(default_factory=list)
    objective_sums: list[float] = field(default_factory=list)


def island_stream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(ISLAND_STREAM_KEY, index)))


def initial_population(
    context: ReschedulingContext, config: GAConfig, pool: WorkerPool
) -> Population:
    """Random islands scored with an E_max calibrated on them."""
    islands_rngs = [island_stream(config.seed, i) for i in range(config.island_count)]
    per_island = config.island_w * config.island_h
    chromosomes = [
        [random_chromosome(context, rng) for _ in range(per_island)] for rng in islands_rngs
    ]
    flat = [c for group in chromosomes for c in group]
    objectives = pool.objectives(flat)
    e_max = calibrate_emax(objectives)

    islands = []
    for i, (rng, group) in enumerate(zip(islands_rngs, chromosomes)):
        values = objectives[i * per_island : (i + 1) * per_island]
        cells = [Individual.scored(c, v, e_max) for c, v in zip(group, values)]
        islands.append(
            Island(
                index=i,
                width=config.island_w,
                height=config.island_h,
                cells=cells,
                rng=rng,
                best=max(cells, key=rank),
            )
        )
    return Population(islands=islands, e_max=e_max)


def step_island(island: Island, evaluator: Evaluator, config: GAConfig, e_max: float) -> Island:
    """One generation on one island.

    Random draws happen in a fixed order: one crossover draw per horizontal
    pair (plus the cut point when it fires), then one mutation draw per cell
    (plus the mutation itself when it fires), all in row-major order.
    """
    rng = island.rng
    n_machines = evaluator.instance.o
    parents = [select_asteroid(island, cell) for cell in range(island.size)]
    genes: list[Chromosome] = [parent.chromosome for parent in parents]
    changed = [False] * island.size

    for row in range(island.height):
        for col in range(0, island.width - 1, 2):
            left = row * island.width + col
            if rng.random() < config.crossover_rate:
                genes[left], genes[left + 1] = crossover_pair(genes[left], genes[left + 1], rng)
                changed[left] = changed[left + 1] = True

    for cell in range(island.size):
        if rng.random() < config.mutation_rate:
            genes[cell] = mutate(genes[cell], n_machines, rng)
            changed[cell] = True

    island.cells = [
        Individual.scored(gene, evaluator.objective(gene), e_max) if dirty else parent
        for gene, dirty, parent in zip(genes, changed, parents)
    ]
    return replace_elitist(island)


def run_epoch(
    evaluator: Evaluator, island: Island, *, config: GAConfig, e_max: float, generations: int
) -> EpochResult:
    """Evolve *island* alone for *generations* generations."""
    result = EpochResult(island)
    for _ in range(generations):
        step_island(island, evaluator, config, e_max)
        result.best.append(island.best.objective)
        result.objective_sums.append(island.objective_sum())
    return result


def evolve(
    instance: Instance,
    context: ReschedulingContext,
    config: GAConfig,
    workers: int = 1,
) -> tuple[Schedule, RunTrace]:
    """Run the hybrid engine and return the best schedule found with its trace.

    Args:
        instance: The problem, new arrivals included.
        context: What is fixed at the rescheduling point.
        config: Engine parameters; ``seed`` fixes every random draw.
        workers: Processes to spread island epochs over; 1 runs in-process.

    Returns:
        The best-ever schedule and the run trace. With nothing pending the
        frozen schedule comes back with an empty trace.
    """
    trace = RunTrace(engine="hybrid")
    if context.pending_count == 0:
        logger.info("Nothing pending at rs=%g; returning the frozen schedule", context.rs)
        return context.frozen_schedule(), trace

    logger.info(
        "Hybrid GA: %d individuals on %d islands, %d generations, K=%d",
        config.population_size,
        config.island_count,
        config.generations,
        context.pending_count,
    )
    evaluator = Evaluator(instance, context)
    with WorkerPool(evaluator, workers) as pool:
        population = initial_population(context, config, pool)
        trace.e_max = population.e_max
        logger.info("Calibrated E_max=%g", population.e_max)
        trace.record(0, population.best().objective, population.mean_objective())

        generation = 0
        while generation < config.generations:
            span = min(config.migration_interval, config.generations - generation)
            epoch = partial(run_epoch, config=config, e_max=population.e_max, generations=span)
            results = pool.map(epoch, population.islands)
            population.islands = [r.island for r in results]
            for offset in range(span):
                trace.record(
                    generation + offset + 1,
                    min(r.best[offset] for r in results),
                    sum(r.objective_sums[offset] for r in results) / population.size,
                )
            generation += span
            logger.debug("Generation %d: best %.4f", generation, trace.rows[-1].best_objective)
            if generation % config.migration_interval == 0 and generation < config.generations:
                migrate_ring(population.islands)

    best = population.best()
    schedule = evaluator.schedule(best.chromosome)
    trace.best_chromosome = best.chromosome
    trace.best_objective = evaluate(instance, schedule)
    logger.info("Hybrid GA finished: best objective %.4f", trace.best_objective.value)
    return schedule, trace

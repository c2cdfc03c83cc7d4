"""Reference engines the hybrid engine is measured against.

Both share the chromosome, decoder and operators of the hybrid engine, draw
from the engine stream of the same seed, and record traces in the same shape.
"""

from __future__ import annotations

import logging

import numpy as np

from edffs.constants import ENGINE_STREAM_KEY
from edffs.encoding import Chromosome, ReschedulingContext, random_chromosome
from edffs.ga.config import GAConfig, RunTrace
from edffs.ga.evaluation import Evaluator, Individual, WorkerPool
from edffs.ga.hybrid import Island
from edffs.ga.operators import (
    calibrate_emax,
    crossover_pair,
    mutate,
    neighbourhood,
    rank,
    tournament_winner,
)
from edffs.model import Instance, Schedule, evaluate

logger = logging.getLogger(__name__)


def engine_stream(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(ENGINE_STREAM_KEY,)))


def _mean(cells: list[Individual]) -> float:
    return sum(cell.objective for cell in cells) / len(cells)


def _score(
    pool: WorkerPool, genes: list[Chromosome], keep: list[Individual | None], e_max: float
) -> list[Individual]:
    """Individuals for *genes*, reusing ``keep[i]`` where it is not None."""
    todo = [i for i, kept in enumerate(keep) if kept is None]
    values = dict(zip(todo, pool.objectives([genes[i] for i in todo])))
    return [
        kept if kept is not None else Individual.scored(genes[i], values[i], e_max)
        for i, kept in enumerate(keep)
    ]


def _initial(
    context: ReschedulingContext, size: int, rng: np.random.Generator, pool: WorkerPool
) -> tuple[list[Individual], float]:
    genes = [random_chromosome(context, rng) for _ in range(size)]
    objectives = pool.objectives(genes)
    e_max = calibrate_emax(objectives)
    return [Individual.scored(g, v, e_max) for g, v in zip(genes, objectives)], e_max


def _finish(
    instance: Instance, evaluator: Evaluator, trace: RunTrace, best: Individual
) -> tuple[Schedule, RunTrace]:
    schedule = evaluator.schedule(best.chromosome)
    trace.best_chromosome = best.chromosome
    trace.best_objective = evaluate(instance, schedule)
    logger.info("%s GA finished: best objective %.4f", trace.engine, trace.best_objective.value)
    return schedule, trace


def classical_ga(
    instance: Instance,
    context: ReschedulingContext,
    config: GAConfig,
    workers: int = 1,
) -> tuple[Schedule, RunTrace]:
    """Panmictic generational GA with roulette-wheel selection and one global elite.

    Each generation: roulette selection of the whole population, random
    disjoint pairing for crossover, per-individual mutation, then the best
    individual ever seen replaces the worst of the new generation.
    """
    trace = RunTrace(engine="classical")
    if context.pending_count == 0:
        return context.frozen_schedule(), trace

    size = config.population_size
    logger.info("Classical GA: %d individuals, %d generations", size, config.generations)
    rng = engine_stream(config.seed)
    evaluator = Evaluator(instance, context)
    with WorkerPool(evaluator, workers) as pool:
        population, e_max = _initial(context, size, rng, pool)
        trace.e_max = e_max
        elite = max(population, key=rank)
        trace.record(0, elite.objective, _mean(population))
        warned = False

        for generation in range(1, config.generations + 1):
            weights = np.array([cell.fitness for cell in population])
            total = weights.sum()
            if total > 0:
                picks = rng.choice(size, size, p=weights / total)
            else:
                if not warned:
                    logger.warning("All fitness values are zero; roulette falls back to uniform")
                    warned = True
                picks = rng.choice(size, size)
            selected = [population[i] for i in picks]

            genes = [cell.chromosome for cell in selected]
            keep: list[Individual | None] = list(selected)
            order = rng.permutation(size)
            for a, b in zip(order[0::2], order[1::2]):
                if rng.random() < config.crossover_rate:
                    genes[a], genes[b] = crossover_pair(genes[a], genes[b], rng)
                    keep[a] = keep[b] = None
            for i in range(size):
                if rng.random() < config.mutation_rate:
                    genes[i] = mutate(genes[i], instance.o, rng)
                    keep[i] = None

            population = _score(pool, genes, keep, e_max)
            challenger = max(population, key=rank)
            if rank(challenger) > rank(elite):
                elite = challenger
            worst = min(range(size), key=lambda i: population[i].fitness)
            population[worst] = elite
            trace.record(generation, elite.objective, _mean(population))

    return _finish(instance, evaluator, trace, elite)


def cellular_ga(
    instance: Instance,
    context: ReschedulingContext,
    config: GAConfig,
    workers: int = 1,
) -> tuple[Schedule, RunTrace]:
    """Single-grid cellular GA with replace-if-better updates.

    Every cell breeds one child from two parents of its five-cell toroidal
    neighbourhood: the tournament winner and the best of the remaining
    neighbours. The child replaces the cell only if strictly fitter. All cells
    of a generation read the previous generation.
    """
    trace = RunTrace(engine="cellular")
    if context.pending_count == 0:
        return context.frozen_schedule(), trace

    logger.info(
        "Cellular GA: %dx%d grid, %d generations",
        config.grid_w,
        config.grid_h,
        config.generations,
    )
    rng = engine_stream(config.seed)
    evaluator = Evaluator(instance, context)
    with WorkerPool(evaluator, workers) as pool:
        cells, e_max = _initial(context, config.population_size, rng, pool)
        trace.e_max = e_max
        grid = Island(0, config.grid_w, config.grid_h, cells, rng, best=max(cells, key=rank))
        trace.record(0, grid.best.objective, _mean(grid.cells))

        for generation in range(1, config.generations + 1):
            genes: list[Chromosome] = []
            keep: list[Individual | None] = []
            for cell in range(grid.size):
                winner = tournament_winner(grid, cell)
                first = grid.cells[winner]
                others = neighbourhood(grid, cell)
                others.remove(winner)
                second = max((grid.cells[i] for i in others), key=lambda ind: ind.fitness)
                child, kept = first.chromosome, first
                if rng.random() < config.crossover_rate:
                    child, _ = crossover_pair(first.chromosome, second.chromosome, rng)
                    kept = None
                if rng.random() < config.mutation_rate:
                    child = mutate(child, instance.o, rng)
                    kept = None
                genes.append(child)
                keep.append(kept)

            children = _score(pool, genes, keep, e_max)
            grid.cells = [
                child if rank(child) > rank(current) else current
                for child, current in zip(children, grid.cells)
            ]
            challenger = max(grid.cells, key=rank)
            if rank(challenger) > rank(grid.best):
                grid.best = challenger
            trace.record(generation, grid.best.objective, _mean(grid.cells))

    return _finish(instance, evaluator, trace, grid.best)

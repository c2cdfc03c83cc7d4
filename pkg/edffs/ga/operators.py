"""Genetic operators shared by the hybrid engine and the baselines.

Operators never modify their inputs: chromosomes are read-only and every
operator returns new ones. Population-level operators (:func:`replace_elitist`,
:func:`migrate_ring`) rearrange cells in place, cells themselves being
immutable :class:`~edffs.ga.evaluation.Individual` records.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from typing import TYPE_CHECKING

import numpy as np

from edffs.constants import FROZEN
from edffs.encoding import Chromosome

if TYPE_CHECKING:
    from edffs.ga.evaluation import Individual
    from edffs.ga.hybrid import Island

logger = logging.getLogger(__name__)


def calibrate_emax(initial_objectives: Sequence[float]) -> float:
    """Smallest ``10**a`` with integer ``a >= 1`` above every initial objective."""
    if len(initial_objectives) == 0:
        raise ValueError("cannot calibrate E_max from an empty population")
    worst = max(initial_objectives)
    exponent = 1
    while 10.0**exponent <= worst:
        exponent += 1
    return 10.0**exponent


def fitness(objective: float, e_max: float) -> float:
    return max(e_max - objective, 0.0)


def rank(individual: Individual) -> tuple[float, float]:
    """Sort key: larger fitness first, lower objective among equal (clamped) fitness."""
    return (individual.fitness, -individual.objective)


def neighbourhood(island: Island, cell: int) -> list[int]:
    """Cell indices of self, north, south, east and west, wrapping within *island*."""
    width, height = island.width, island.height
    row, col = divmod(cell, width)
    return [
        cell,
        ((row - 1) % height) * width + col,
        ((row + 1) % height) * width + col,
        row * width + (col + 1) % width,
        row * width + (col - 1) % width,
    ]


def tournament_winner(island: Island, cell: int) -> int:
    """Index of the fittest cell around *cell*.

    Ties keep the earlier of self, north, south, east, west.
    """
    cells = island.cells
    winner = cell
    for index in neighbourhood(island, cell)[1:]:
        if cells[index].fitness > cells[winner].fitness:
            winner = index
    return winner


def select_asteroid(island: Island, cell: int) -> Individual:
    """Winner of the five-cell tournament around *cell*."""
    return island.cells[tournament_winner(island, cell)]


def repair_priority(y: np.ndarray, k: int) -> np.ndarray:
    """Restore a priority matrix to a permutation of ``1..k``.

    Non-frozen cells are scanned in row-major order. The first occurrence of a
    value stays; every later duplicate takes the smallest value still missing.
    """
    repaired = np.array(y, dtype=np.int64)
    free = repaired != FROZEN
    values = repaired[free].tolist()
    missing = iter(sorted(set(range(1, k + 1)).difference(values)))
    seen: set[int] = set()
    for i, value in enumerate(values):
        if value in seen:
            values[i] = next(missing)
        seen.add(values[i])
    repaired[free] = values
    return repaired


def single_point_crossover(
    parent_a: Chromosome, parent_b: Chromosome, point: int
) -> tuple[Chromosome, Chromosome]:
    """Swap every cell at row-major position ``>= point`` between the parents.

    The same cut applies to ``x`` and ``y``; both children's priorities are
    then repaired.
    """
    k = int((parent_a.y != FROZEN).sum())
    shape = parent_a.x.shape
    xa, xb = parent_a.x.ravel(), parent_b.x.ravel()
    ya, yb = parent_a.y.ravel(), parent_b.y.ravel()
    child_a = Chromosome(
        np.concatenate([xa[:point], xb[point:]]).reshape(shape),
        repair_priority(np.concatenate([ya[:point], yb[point:]]).reshape(shape), k),
    )
    child_b = Chromosome(
        np.concatenate([xb[:point], xa[point:]]).reshape(shape),
        repair_priority(np.concatenate([yb[:point], ya[point:]]).reshape(shape), k),
    )
    return child_a, child_b


def crossover_pair(
    parent_a: Chromosome, parent_b: Chromosome, rng: np.random.Generator
) -> tuple[Chromosome, Chromosome]:
    """Single-point crossover at a point drawn uniformly from ``1..cells-1``."""
    total = parent_a.x.size
    if total < 2:
        return parent_a, parent_b
    point = int(rng.integers(1, total))
    return single_point_crossover(parent_a, parent_b, point)


def mutate(chromosome: Chromosome, n_machines: int, rng: np.random.Generator) -> Chromosome:
    """Move every free operation to another machine and swap two priorities.

    Each free ``x`` cell is redrawn uniformly among the ``o - 1`` other
    machines (nothing to do when ``o == 1``). Two distinct free ``y`` cells,
    picked uniformly, exchange values (nothing to do when ``K < 2``).
    """
    free = chromosome.free_mask
    k = int(free.sum())
    x = chromosome.x.copy()
    y = chromosome.y.copy()
    if n_machines > 1 and k:
        x[free] = (x[free] + rng.integers(1, n_machines, size=k)) % n_machines
    if k >= 2:
        positions = np.flatnonzero(free)
        first, second = positions[rng.choice(k, 2, replace=False)]
        flat = y.ravel()
        flat[first], flat[second] = flat[second], flat[first]
    return Chromosome(x, y)


def replace_elitist(island: Island) -> Island:
    """Keep the island's best-ever individual alive.

    The history record is refreshed from the current cells first, then it
    overwrites the cell with the lowest fitness.
    """
    cells = island.cells
    current_best = max(cells, key=rank)
    if island.best is None or rank(current_best) > rank(island.best):
        island.best = current_best
    worst = min(range(len(cells)), key=lambda i: cells[i].fitness)
    cells[worst] = island.best
    return island


def migrate_ring(islands: Sequence[Island]) -> Sequence[Island]:
    """Island ``i`` takes island ``i - 1``'s best over its own worst, all at once."""
    if len(islands) < 2:
        return islands
    donors = [max(island.cells, key=rank) for island in islands]
    for i, island in enumerate(islands):
        cells = island.cells
        worst = min(range(len(cells)), key=lambda c: cells[c].fitness)
        cells[worst] = donors[i - 1]
    logger.debug(
        "Migrated %d individuals around the ring, best donor objective %.4f",
        len(islands),
        min(d.objective for d in donors),
    )
    return islands

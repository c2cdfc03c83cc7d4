"""Exact search over everything the decoder can produce.

For tiny problems the exact solver enumerates every machine assignment of the
pending operations together with every order that keeps each job's stages in
sequence, decodes each candidate with :func:`edffs.encoding.decode`, and keeps
the best. The optimum is taken over the decoder's image, which is also the
space the genetic engines search, so "an engine reached the optimum" is a
checkable statement.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from collections.abc import Iterator
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from edffs.constants import (
    DEFAULT_ORACLE_MAX_PENDING,
    DEFAULT_ORACLE_MAX_SEARCH_SPACE,
    DEFAULT_ORACLE_TIME_BUDGET_SECONDS,
    FROZEN,
    ORACLE_BUDGET_CHECK_EVERY,
)
from edffs.encoding import Chromosome, ReschedulingContext
from edffs.ga.evaluation import Evaluator, WorkerPool
from edffs.model import Instance, Objective, Schedule, evaluate

if TYPE_CHECKING:
    from edffs.config import OracleConfig

logger = logging.getLogger(__name__)


class OracleLimitError(RuntimeError):
    """The search is too large for the configured limits."""

    def __init__(self, message: str, search_space: int) -> None:
        super().__init__(message)
        self.search_space = search_space


@dataclass(frozen=True)
class OracleLimit:
    max_pending: int = DEFAULT_ORACLE_MAX_PENDING
    max_search_space: int = DEFAULT_ORACLE_MAX_SEARCH_SPACE
    time_budget: float = DEFAULT_ORACLE_TIME_BUDGET_SECONDS

    @classmethod
    def from_config(cls, config: OracleConfig) -> OracleLimit:
        return cls(
            max_pending=config.max_pending,
            max_search_space=config.max_search_space,
            time_budget=config.time_budget,
        )


def _chains(context: ReschedulingContext) -> list[list[tuple[int, int]]]:
    """Pending operations of each job that has any, in stage order."""
    chains = []
    for j, row in enumerate(context.pending_mask.tolist()):
        chain = [(j, s) for s, pending in enumerate(row) if pending]
        if chain:
            chains.append(chain)
    return chains


def search_space_size(context: ReschedulingContext) -> int:
    """Candidates the exact search visits: ``o**K`` times the chain interleavings."""
    lengths = [len(chain) for chain in _chains(context)]
    k = sum(lengths)
    interleavings = math.factorial(k)
    for length in lengths:
        interleavings //= math.factorial(length)
    return context.n_machines**k * interleavings


def interleavings(chains: list[list[tuple[int, int]]]) -> Iterator[tuple[tuple[int, int], ...]]:
    """Every merge of *chains* that keeps each chain in order, lexicographically."""
    positions = [0] * len(chains)
    total = sum(len(chain) for chain in chains)
    prefix: list[tuple[int, int]] = []

    def walk() -> Iterator[tuple[tuple[int, int], ...]]:
        if len(prefix) == total:
            yield tuple(prefix)
            return
        for c, chain in enumerate(chains):
            if positions[c] < len(chain):
                prefix.append(chain[positions[c]])
                positions[c] += 1
                yield from walk()
                positions[c] -= 1
                prefix.pop()

    return walk()


def order_priorities(
    order: tuple[tuple[int, int], ...], shape: tuple[int, int]
) -> np.ndarray:
    """Priority matrix under which the decoder ranks operations exactly as *order*."""
    y = np.full(shape, FROZEN, dtype=np.int64)
    k = len(order)
    for position, (j, s) in enumerate(order):
        y[j, s] = k - position
    return y


@dataclass(frozen=True)
class _SliceResult:
    best: tuple[float, tuple[int, ...], tuple[tuple[int, int], ...]] | None
    visited: int
    timed_out: bool


def _search_slice(evaluator: Evaluator, bounds: tuple[int, int, float]) -> _SliceResult:
    """Best candidate among machine assignments ``start..stop`` of the product."""
    start, stop, budget = bounds
    context = evaluator.context
    cells = [tuple(cell) for cell in np.argwhere(context.pending_mask).tolist()]
    chains = _chains(context)
    orders = list(interleavings(chains))
    shape = (context.n_jobs, context.n_stages)
    priorities = [order_priorities(order, shape) for order in orders]
    deadline = time.monotonic() + budget

    best = None
    visited = 0
    assignments = itertools.product(range(context.n_machines), repeat=len(cells))
    for machines in itertools.islice(assignments, start, stop):
        x = np.full(shape, FROZEN, dtype=np.int64)
        for (j, s), m in zip(cells, machines):
            x[j, s] = m
        for order, y in zip(orders, priorities):
            value = evaluator.objective(Chromosome(x, y))
            if best is None or value < best[0]:
                best = (value, machines, order)
            visited += 1
            if visited % ORACLE_BUDGET_CHECK_EVERY == 0 and time.monotonic() > deadline:
                return _SliceResult(best, visited, timed_out=True)
    return _SliceResult(best, visited, timed_out=False)


def brute_force(
    instance: Instance,
    context: ReschedulingContext,
    limit: OracleLimit | None = None,
    workers: int = 1,
) -> tuple[Schedule, Objective]:
    """The best decodable schedule, found by exhaustive enumeration.

    Among equal objectives the lexicographically smallest (machines, order)
    candidate wins, machines taken over pending cells in row-major order.

    Args:
        instance: The problem.
        context: What is fixed; only PENDING operations are searched.
        limit: Size and time caps; defaults apply when None.
        workers: Processes sharing the machine-assignment space.

    Raises:
        OracleLimitError: If K or the search space exceeds *limit*, or the
            time budget runs out.
    """
    limit = limit or OracleLimit()
    k = context.pending_count
    space = search_space_size(context)
    if k == 0:
        schedule = context.frozen_schedule()
        return schedule, evaluate(instance, schedule)
    if k > limit.max_pending:
        raise OracleLimitError(
            f"{k} pending operations exceed the limit of {limit.max_pending} "
            f"(search space {space})",
            space,
        )
    if space > limit.max_search_space:
        raise OracleLimitError(
            f"search space {space} exceeds the limit of {limit.max_search_space}", space
        )

    assignments = context.n_machines**k
    slices = max(1, min(int(workers), assignments))
    edges = np.linspace(0, assignments, slices + 1).astype(int).tolist()
    bounds = [(edges[i], edges[i + 1], limit.time_budget) for i in range(slices)]
    logger.debug("Enumerating %d candidates for K=%d in %d slice(s)", space, k, slices)

    evaluator = Evaluator(instance, context)
    with WorkerPool(evaluator, workers) as pool:
        results = pool.map(_search_slice, bounds)

    visited = sum(r.visited for r in results)
    if any(r.timed_out for r in results):
        raise OracleLimitError(
            f"time budget of {limit.time_budget:g}s ran out after {visited} of {space} candidates",
            space,
        )
    logger.debug("Visited %d candidates", visited)

    value, machines, order = min(r.best for r in results if r.best is not None)
    cells = np.argwhere(context.pending_mask).tolist()
    x = np.full((context.n_jobs, context.n_stages), FROZEN, dtype=np.int64)
    for (j, s), m in zip(cells, machines):
        x[j, s] = m
    chromosome = Chromosome(x, order_priorities(order, x.shape))
    schedule = evaluator.schedule(chromosome)
    objective = evaluate(instance, schedule)
    logger.info("Exact optimum %.4f over %d candidates", objective.value, visited)
    return schedule, objective

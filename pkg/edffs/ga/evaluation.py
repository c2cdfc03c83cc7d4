"""Scoring chromosomes, in-process or across a pool of worker processes.

Worker processes receive the instance and rescheduling context once, through
the pool initializer, and keep them for the life of the pool. Tasks then only
carry chromosomes (or whole islands) back and forth.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Any, TypeVar

from edffs.constants import EVALUATION_CHUNK_SIZE
from edffs.encoding import Chromosome, ReschedulingContext, decode
from edffs.ga.operators import fitness
from edffs.model import Instance, Schedule, evaluate

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class Individual:
    """One population cell: a chromosome with its objective and fitness."""

    chromosome: Chromosome
    objective: float
    fitness: float

    @classmethod
    def scored(cls, chromosome: Chromosome, objective: float, e_max: float) -> Individual:
        return cls(chromosome, float(objective), fitness(objective, e_max))


class Evaluator:
    """Decodes and scores chromosomes against one instance and context."""

    def __init__(self, instance: Instance, context: ReschedulingContext) -> None:
        self.instance = instance
        self.context = context

    def schedule(self, chromosome: Chromosome) -> Schedule:
        return decode(chromosome, self.context, self.instance)

    def objective(self, chromosome: Chromosome) -> float:
        return evaluate(self.instance, self.schedule(chromosome)).value

    def objectives(self, chromosomes: Iterable[Chromosome]) -> list[float]:
        return [self.objective(c) for c in chromosomes]


_worker_evaluator: Evaluator | None = None


def _install(evaluator: Evaluator) -> None:
    global _worker_evaluator
    _worker_evaluator = evaluator


def _call_in_worker(fn: Callable[[Evaluator, Any], Any], item: Any) -> Any:
    if _worker_evaluator is None:
        raise RuntimeError("worker process was started without an evaluator")
    return fn(_worker_evaluator, item)


def _score_chunk(evaluator: Evaluator, chunk: list[Chromosome]) -> list[float]:
    return evaluator.objectives(chunk)


class WorkerPool:
    """Maps evaluator-bound tasks over items, preserving submission order.

    With ``workers <= 1`` tasks run in the calling process. Otherwise a
    :class:`~concurrent.futures.ProcessPoolExecutor` is started on entering the
    context and shut down on leaving it. *fn* passed to :meth:`map` must be a
    module-level function (or a :func:`functools.partial` of one).
    """

    def __init__(self, evaluator: Evaluator, workers: int = 1) -> None:
        self.evaluator = evaluator
        self.workers = max(1, int(workers))
        self._executor: ProcessPoolExecutor | None = None

    def __enter__(self) -> WorkerPool:
        if self.workers > 1:
            logger.debug("Starting %d worker processes", self.workers)
            self._executor = ProcessPoolExecutor(
                max_workers=self.workers,
                initializer=_install,
                initargs=(self.evaluator,),
            )
        return self

    def __exit__(self, *exc_info: object) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True, cancel_futures=True)
            self._executor = None

    def map(self, fn: Callable[[Evaluator, T], R], items: Sequence[T]) -> list[R]:
        if self._executor is None:
            return [fn(self.evaluator, item) for item in items]
        return list(self._executor.map(partial(_call_in_worker, fn), items))

    def objectives(self, chromosomes: Sequence[Chromosome]) -> list[float]:
        """Objective value of every chromosome, in order."""
        if self._executor is None:
            return self.evaluator.objectives(chromosomes)
        chunks = [
            list(chromosomes[i : i + EVALUATION_CHUNK_SIZE])
            for i in range(0, len(chromosomes), EVALUATION_CHUNK_SIZE)
        ]
        return [value for chunk in self.map(_score_chunk, chunks) for value in chunk]

"""Chromosome representation and the power-aware decoder.

A chromosome is a pair of ``(jobs, g)`` integer matrices. ``x`` names the target
machine of every pending operation and ``y`` gives it a unique priority in
``1..K``, larger meaning earlier. Operations that are no longer pending at the
rescheduling point hold :data:`~edffs.constants.FROZEN` in both.

Decoding happens in two steps. :func:`build_order` turns the priorities into a
rank order that respects stage order within each job. :func:`decode` then walks
that order once, starting each operation as early as its release, its job
predecessor, its machine and the rescheduling point allow, and pushing it later
to the next completion event for as long as its power would break the bound.
Commitments are final in rank order; there is no backfilling.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from typing import Any

import numpy as np

from edffs.constants import FROZEN, ORDER_DONE, ORDER_RUNNING, TIME_EPSILON
from edffs.model import Instance, OpStatus, Schedule

logger = logging.getLogger(__name__)


class InfeasiblePowerError(RuntimeError):
    """An operation can never start without breaking the power bound."""


class OpState(IntEnum):
    """Where an operation stands at the rescheduling point.

    PINNED is used by the static baseline only: an original operation that has
    not started yet but keeps its planned machine and start regardless.
    """

    COMPLETED = 0
    RUNNING = 1
    PENDING = 2
    PINNED = 3


def _readonly(values: Any, dtype: Any) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ReschedulingContext:
    """The state of the shop at the rescheduling point.

    Attributes:
        rs: The rescheduling point; no pending operation may start before it.
        state: ``(jobs, g)`` :class:`OpState` per operation.
        fixed_machine: Planned machine of every non-pending operation, -1 otherwise.
        fixed_start: Planned start of every non-pending operation, NaN otherwise.
        machine_free: ``(g, o)`` time from which each machine is available.
    """

    rs: float
    state: np.ndarray
    fixed_machine: np.ndarray
    fixed_start: np.ndarray
    machine_free: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "rs", float(self.rs))
        object.__setattr__(self, "state", _readonly(self.state, np.int8))
        object.__setattr__(self, "fixed_machine", _readonly(self.fixed_machine, np.int64))
        object.__setattr__(self, "fixed_start", _readonly(self.fixed_start, float))
        object.__setattr__(self, "machine_free", _readonly(self.machine_free, float))

    @property
    def n_jobs(self) -> int:
        return self.state.shape[0]

    @property
    def n_stages(self) -> int:
        return self.state.shape[1]

    @property
    def n_machines(self) -> int:
        return self.machine_free.shape[1]

    @cached_property
    def pending_mask(self) -> np.ndarray:
        mask = self.state == OpState.PENDING
        mask.setflags(write=False)
        return mask

    @property
    def pending_count(self) -> int:
        """K, the number of operations a chromosome decides."""
        return int(self.pending_mask.sum())

    def committed(self, instance: Instance) -> list[tuple[float, float, float]]:
        """``(start, end, power)`` of every operation still occupying the shop at RS."""
        intervals = []
        for j, s in np.argwhere(
            (self.state == OpState.RUNNING) | (self.state == OpState.PINNED)
        ).tolist():
            m = int(self.fixed_machine[j, s])
            start = float(self.fixed_start[j, s])
            end = start + instance.proc_table[j][s][m]
            if end > self.rs:
                intervals.append((start, end, instance.power_table[j][s][m]))
        return intervals

    def frozen_schedule(self) -> Schedule:
        """The non-pending commitments alone, pending cells left unassigned."""
        status = np.where(self.pending_mask, OpStatus.ACTIVE, OpStatus.FROZEN)
        return Schedule(self.fixed_machine, self.fixed_start, status)


@dataclass(frozen=True, eq=False)
class Chromosome:
    """Target-machine matrix ``x`` and priority matrix ``y``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", _readonly(self.x, np.int64))
        object.__setattr__(self, "y", _readonly(self.y, np.int64))

    @property
    def free_mask(self) -> np.ndarray:
        """Cells a GA operator may change."""
        return self.x != FROZEN

    def to_dict(self) -> dict[str, Any]:
        """The debug dump: both matrices with -1 marking frozen cells."""
        return {"x": self.x.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Chromosome:
        return cls(x=data["x"], y=data["y"])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Chromosome):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class OrderIndex:
    """The order matrix and the rank sequence it encodes.

    Attributes:
        z: ``(jobs, g)`` rank in ``1..K`` per pending operation;
            :data:`~edffs.constants.ORDER_RUNNING` for running or pinned ones and
            :data:`~edffs.constants.ORDER_DONE` for completed ones.
        sequence: Pending ``(job, stage)`` operations in rank order.
    """

    z: np.ndarray
    sequence: tuple[tuple[int, int], ...]


def freeze(instance: Instance, original_schedule: Schedule, rs: float) -> ReschedulingContext:
    """Classify every operation against the rescheduling point *rs*.

    An original operation is COMPLETED if it finishes by *rs*, RUNNING if it
    started before *rs* and finishes after it, PENDING otherwise. Every
    operation of a new-arrival job is PENDING. A machine becomes free at *rs* or
    when its running operation completes, whichever is later.

    Args:
        instance: The instance including any new-arrival jobs.
        original_schedule: The plan covering the original jobs.
        rs: The rescheduling point, nonnegative.

    Raises:
        ValueError: If *rs* is negative or the plan does not fit the instance.
    """
    return _classify(instance, original_schedule, rs, pin_unstarted=False)


def pin_original(instance: Instance, original_schedule: Schedule, rs: float) -> ReschedulingContext:
    """Context for the static baseline: the whole original plan stays as it is.

    Original operations that have not started by *rs* are PINNED rather than
    PENDING, so only the new-arrival jobs are left to schedule, and each machine
    is free only once its last original operation completes.
    """
    return _classify(instance, original_schedule, rs, pin_unstarted=True)


def _classify(
    instance: Instance, original_schedule: Schedule, rs: float, pin_unstarted: bool
) -> ReschedulingContext:
    if rs < 0:
        raise ValueError(f"rescheduling point must be nonnegative, got {rs}")
    originals = original_schedule.n_jobs
    if originals > instance.n_jobs or original_schedule.n_stages != instance.g:
        raise ValueError(
            f"original plan covers {original_schedule.assign.shape}, "
            f"instance has {(instance.n_jobs, instance.g)}"
        )

    shape = (instance.n_jobs, instance.g)
    state = np.full(shape, OpState.PENDING, dtype=np.int8)
    fixed_machine = np.full(shape, FROZEN, dtype=np.int64)
    fixed_start = np.full(shape, np.nan)
    machine_free = np.full((instance.g, instance.o), float(rs))

    finish = original_schedule.completion(instance)
    for j in range(originals):
        for s in range(instance.g):
            start, end = float(original_schedule.start[j, s]), float(finish[j, s])
            m = int(original_schedule.assign[j, s])
            if end <= rs:
                state[j, s] = OpState.COMPLETED
            elif start < rs:
                state[j, s] = OpState.RUNNING
            elif pin_unstarted:
                state[j, s] = OpState.PINNED
            else:
                continue
            fixed_machine[j, s] = m
            fixed_start[j, s] = start
            if state[j, s] != OpState.COMPLETED:
                machine_free[s, m] = max(machine_free[s, m], end)

    return ReschedulingContext(
        rs=rs,
        state=state,
        fixed_machine=fixed_machine,
        fixed_start=fixed_start,
        machine_free=machine_free,
    )


def static_context(instance: Instance) -> ReschedulingContext:
    """Everything pending and every machine free at time 0: plain static solving."""
    shape = (instance.n_jobs, instance.g)
    return ReschedulingContext(
        rs=0.0,
        state=np.full(shape, OpState.PENDING, dtype=np.int8),
        fixed_machine=np.full(shape, FROZEN, dtype=np.int64),
        fixed_start=np.full(shape, np.nan),
        machine_free=np.zeros((instance.g, instance.o)),
    )


def random_chromosome(context: ReschedulingContext, rng: np.random.Generator) -> Chromosome:
    """Draw machines uniformly and priorities as a uniform permutation of ``1..K``."""
    pending = context.pending_mask
    k = context.pending_count
    x = np.full(pending.shape, FROZEN, dtype=np.int64)
    y = np.full(pending.shape, FROZEN, dtype=np.int64)
    x[pending] = rng.integers(0, context.n_machines, size=k)
    y[pending] = rng.permutation(k) + 1
    return Chromosome(x, y)


def build_order(chromosome: Chromosome, context: ReschedulingContext) -> OrderIndex:
    """Rank pending operations greedily by priority, respecting stage order.

    An operation becomes eligible once its predecessor in the same job is no
    longer pending or has been ranked. The eligible operation with the largest
    ``y`` takes the next rank.
    """
    state = context.state
    z = np.where(state == OpState.COMPLETED, ORDER_DONE, ORDER_RUNNING).astype(np.int64)
    pending = context.pending_mask.tolist()
    y = chromosome.y.tolist()
    stages = context.n_stages

    eligible: list[tuple[int, int, int]] = []
    for j, row in enumerate(pending):
        if True in row:
            s = row.index(True)
            heapq.heappush(eligible, (-y[j][s], j, s))

    sequence = []
    while eligible:
        _, j, s = heapq.heappop(eligible)
        sequence.append((j, s))
        z[j, s] = len(sequence)
        if s + 1 < stages and pending[j][s + 1]:
            heapq.heappush(eligible, (-y[j][s + 1], j, s + 1))

    z.setflags(write=False)
    return OrderIndex(z=z, sequence=tuple(sequence))


def decode(chromosome: Chromosome, context: ReschedulingContext, instance: Instance) -> Schedule:
    """Turn a chromosome into a feasible schedule.

    Operations are placed one at a time in rank order. Each starts at the latest
    of the rescheduling point, its release (first stage) or its predecessor's
    completion, and the time its target machine is free. If its power on top of
    what is already committed would exceed ``q_max`` anywhere in its processing
    interval, the start moves to the next completion after the first overloaded
    instant, and the check repeats. Running and pinned operations count as
    committed from the outset.

    Returns:
        The merged schedule: non-pending operations FROZEN and copied from the
        context, pending ones ACTIVE at their decoded machine and start.

    Raises:
        InfeasiblePowerError: If an operation overloads the shop even after
            every committed operation has finished.
    """
    order = build_order(chromosome, context)
    proc = instance.proc_table
    power = instance.power_table
    release = instance.release.tolist()
    q_max = instance.q_max
    rs = context.rs
    x = chromosome.x.tolist()

    assign = context.fixed_machine.copy()
    start = context.fixed_start.copy()
    finish = (context.fixed_start + _fixed_durations(context, instance)).tolist()
    machine_free = context.machine_free.tolist()
    committed = context.committed(instance)

    for j, s in order.sequence:
        m = x[j][s]
        duration = proc[j][s][m]
        ready = max(rs, release[j] if s == 0 else finish[j][s - 1], machine_free[s][m])
        begin = _earliest_within_power(committed, ready, duration, power[j][s][m], q_max)
        end = begin + duration
        committed.append((begin, end, power[j][s][m]))
        assign[j, s] = m
        start[j, s] = begin
        finish[j][s] = end
        machine_free[s][m] = end

    status = np.where(context.pending_mask, OpStatus.ACTIVE, OpStatus.FROZEN)
    return Schedule(assign, start, status)


def _fixed_durations(context: ReschedulingContext, instance: Instance) -> np.ndarray:
    machines = np.clip(context.fixed_machine, 0, instance.o - 1)[:, :, None]
    durations = np.take_along_axis(instance.proc_time, machines, axis=2)[:, :, 0]
    return np.where(context.pending_mask, np.nan, durations)


def _earliest_within_power(
    committed: list[tuple[float, float, float]],
    ready: float,
    duration: float,
    draw: float,
    q_max: float,
) -> float:
    begin = ready
    while True:
        overload = _first_overload(committed, begin, begin + duration, draw, q_max)
        if overload is None:
            return begin
        later = [end for _, end, _ in committed if end - overload > TIME_EPSILON]
        if not later:
            raise InfeasiblePowerError(
                f"power draw {draw:g} exceeds q_max {q_max:g} with nothing left to finish"
            )
        begin = min(later)


def _first_overload(
    committed: list[tuple[float, float, float]],
    begin: float,
    end: float,
    draw: float,
    q_max: float,
) -> float | None:
    """First instant in ``[begin, end)`` where adding *draw* exceeds *q_max*.

    The committed load only rises at interval starts, so it is enough to look at
    *begin* and at every committed start inside the window. Instants closer than
    TIME_EPSILON count as one.
    """
    eps = TIME_EPSILON
    overlapping = [iv for iv in committed if iv[1] - begin > eps and end - iv[0] > eps]
    if not overlapping:
        return None if draw <= q_max + eps else begin
    instants = sorted({begin, *(iv[0] for iv in overlapping if iv[0] > begin)})
    limit = q_max + eps - draw
    for t in instants:
        load = sum(p for s, e, p in overlapping if s <= t + eps and e - t > eps)
        if load > limit:
            return t
    return None

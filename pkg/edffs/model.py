"""The flexible flow shop problem data and everything that judges a schedule.

An :class:`Instance` holds jobs, stages and machines with their processing
times and power draws; a :class:`Schedule` commits every operation to a machine
and a start time. :func:`evaluate` scores a schedule (weighted total tardiness
plus makespan), :func:`power_profile` derives the fleet-wide power draw over
time, and :func:`validate` lists every constraint a schedule breaks.

Time is continuous. Operations occupy half-open intervals ``[start,
completion)``: one finishing at ``t`` and another starting at ``t`` on the same
machine do not conflict, and their power does not stack at ``t``.

Machine indices are local to a stage (``0..o-1``). Job indices run over the
original jobs first (``0..n-1``) and then the new arrivals (``n..n+n'-1``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from typing import TYPE_CHECKING, Any

import numpy as np

from edffs.constants import TIME_EPSILON

if TYPE_CHECKING:
    from edffs.encoding import ReschedulingContext

logger = logging.getLogger(__name__)


class InstanceError(ValueError):
    """An instance is malformed or breaks one of its invariants."""


class InvalidScheduleError(ValueError):
    """A schedule cannot be scored: an operation has no machine or start."""


class OpStatus(IntEnum):
    """Whether an operation was decided by this schedule or inherited from the plan."""

    ACTIVE = 0
    FROZEN = 1


def _readonly(values: Any, dtype: Any) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Instance:
    """One flexible flow shop problem.

    Attributes:
        n: Number of original jobs.
        n_prime: Number of new-arrival jobs (0 for a static problem).
        g: Number of stages.
        o: Machines per stage; every stage has the same count.
        proc_time: ``(n+n', g, o)`` processing times, all positive.
        power: ``(n+n', g, o)`` power drawn while an operation runs.
        q_max: Upper bound on the instantaneous total power.
        wt: Weight of total tardiness in the objective.
        release: Per-job release times.
        due: Per-job due dates.
    """

    n: int
    n_prime: int
    g: int
    o: int
    proc_time: np.ndarray
    power: np.ndarray
    q_max: float
    wt: float
    release: np.ndarray
    due: np.ndarray

    def __post_init__(self) -> None:
        for name in ("proc_time", "power", "release", "due"):
            object.__setattr__(self, name, _readonly(getattr(self, name), float))
        object.__setattr__(self, "q_max", float(self.q_max))
        object.__setattr__(self, "wt", float(self.wt))
        self._check()

    def _check(self) -> None:
        if self.n < 0 or self.n_prime < 0 or self.g < 1 or self.o < 1:
            raise InstanceError(
                f"bad dimensions n={self.n} n_prime={self.n_prime} g={self.g} o={self.o}"
            )
        jobs = self.n_jobs
        for name in ("proc_time", "power"):
            if getattr(self, name).shape != (jobs, self.g, self.o):
                raise InstanceError(
                    f"{name} has shape {getattr(self, name).shape}, "
                    f"expected {(jobs, self.g, self.o)}"
                )
        for name in ("release", "due"):
            if getattr(self, name).shape != (jobs,):
                shape = getattr(self, name).shape
                raise InstanceError(f"{name} has shape {shape}, expected {(jobs,)}")
        if jobs and not np.all(self.proc_time > 0):
            raise InstanceError("every processing time must be positive")
        if jobs and not np.all(self.power >= 0):
            raise InstanceError("power draws cannot be negative")
        if self.wt < 0:
            raise InstanceError(f"wt must be nonnegative, got {self.wt}")
        if jobs and self.power.max() > self.q_max + TIME_EPSILON:
            raise InstanceError(
                f"q_max={self.q_max} is below the largest single power draw "
                f"{self.power.max()}; that operation could never start"
            )
        late = np.flatnonzero(self.due < self.release - TIME_EPSILON)
        if late.size:
            raise InstanceError(f"due date before release for job(s) {late.tolist()}")

    @property
    def n_jobs(self) -> int:
        """Total jobs, originals plus arrivals."""
        return self.n + self.n_prime

    @cached_property
    def proc_table(self) -> list[list[list[float]]]:
        """``proc_time`` as nested lists, for the decoder's scalar-heavy loop."""
        return self.proc_time.tolist()

    @cached_property
    def power_table(self) -> list[list[list[float]]]:
        """``power`` as nested lists, for the decoder's scalar-heavy loop."""
        return self.power.tolist()

    def with_arrivals(
        self,
        release: Any,
        due: Any,
        proc_time: Any,
        power: Any,
    ) -> Instance:
        """Append new-arrival jobs after the existing ones.

        Args:
            release: Release time per new job.
            due: Due date per new job.
            proc_time: ``(count, g, o)`` processing times of the new jobs.
            power: ``(count, g, o)`` power draws of the new jobs.

        Returns:
            A new instance whose ``n_prime`` grew by the number of new jobs.
        """
        release = np.asarray(release, dtype=float).reshape(-1)
        count = release.size
        shape = (count, self.g, self.o)
        return Instance(
            n=self.n,
            n_prime=self.n_prime + count,
            g=self.g,
            o=self.o,
            proc_time=np.concatenate([self.proc_time, np.asarray(proc_time, float).reshape(shape)]),
            power=np.concatenate([self.power, np.asarray(power, float).reshape(shape)]),
            q_max=self.q_max,
            wt=self.wt,
            release=np.concatenate([self.release, release]),
            due=np.concatenate([self.due, np.asarray(due, dtype=float).reshape(-1)]),
        )

    def originals(self) -> Instance:
        """The same instance without its new-arrival jobs."""
        return Instance(
            n=self.n,
            n_prime=0,
            g=self.g,
            o=self.o,
            proc_time=self.proc_time[: self.n],
            power=self.power[: self.n],
            q_max=self.q_max,
            wt=self.wt,
            release=self.release[: self.n],
            due=self.due[: self.n],
        )

    def with_wt(self, wt: float) -> Instance:
        """The same instance under a different tardiness weight."""
        return Instance(
            n=self.n,
            n_prime=self.n_prime,
            g=self.g,
            o=self.o,
            proc_time=self.proc_time,
            power=self.power,
            q_max=self.q_max,
            wt=wt,
            release=self.release,
            due=self.due,
        )

    def to_dict(self) -> dict[str, Any]:
        """Render the instance in its JSON shape."""
        return {
            "n": self.n,
            "n_prime": self.n_prime,
            "g": self.g,
            "o": self.o,
            "q_max": self.q_max,
            "wt": self.wt,
            "proc_time": self.proc_time.tolist(),
            "power": self.power.tolist(),
            "release": self.release.tolist(),
            "due": self.due.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Instance:
        """Build an instance from its JSON shape.

        Raises:
            InstanceError: If a field is missing or an invariant fails.
        """
        missing = [key for key in _INSTANCE_FIELDS if key not in data]
        if missing:
            raise InstanceError(f"instance is missing field(s): {', '.join(missing)}")
        return cls(
            n=int(data["n"]),
            n_prime=int(data["n_prime"]),
            g=int(data["g"]),
            o=int(data["o"]),
            proc_time=data["proc_time"],
            power=data["power"],
            q_max=data["q_max"],
            wt=data["wt"],
            release=data["release"],
            due=data["due"],
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None  # type: ignore[assignment]


_INSTANCE_FIELDS = ("n", "n_prime", "g", "o", "q_max", "wt", "proc_time", "power", "release", "due")


@dataclass(frozen=True, eq=False)
class Schedule:
    """Machine and start-time commitments for every operation.

    Attributes:
        assign: ``(jobs, g)`` stage-local machine per operation; -1 if unassigned.
        start: ``(jobs, g)`` start time per operation; NaN if unassigned.
        status: ``(jobs, g)`` :class:`OpStatus` per operation. Operations
            inherited unchanged from an earlier plan are FROZEN.
    """

    assign: np.ndarray
    start: np.ndarray
    status: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        assign = _readonly(self.assign, np.int64)
        start = _readonly(self.start, float)
        if assign.ndim != 2 or assign.shape != start.shape:
            raise InvalidScheduleError(
                f"assign {assign.shape} and start {start.shape} must be matching 2-D arrays"
            )
        status = self.status
        if status is None:
            status = np.full(assign.shape, OpStatus.ACTIVE, dtype=np.int8)
        status = _readonly(status, np.int8)
        if status.shape != assign.shape:
            raise InvalidScheduleError(f"status has shape {status.shape}, expected {assign.shape}")
        object.__setattr__(self, "assign", assign)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "status", status)

    @property
    def n_jobs(self) -> int:
        return self.assign.shape[0]

    @property
    def n_stages(self) -> int:
        return self.assign.shape[1]

    def is_complete(self) -> bool:
        """Whether every operation has a machine and a finite start."""
        return bool(np.all(self.assign >= 0) and np.all(np.isfinite(self.start)))

    def durations(self, instance: Instance) -> np.ndarray:
        """Processing time of each operation on its assigned machine."""
        machines = np.clip(self.assign, 0, instance.o - 1)[:, :, None]
        return np.take_along_axis(instance.proc_time[: self.n_jobs], machines, axis=2)[:, :, 0]

    def powers(self, instance: Instance) -> np.ndarray:
        """Power of each operation on its assigned machine."""
        machines = np.clip(self.assign, 0, instance.o - 1)[:, :, None]
        return np.take_along_axis(instance.power[: self.n_jobs], machines, axis=2)[:, :, 0]

    def completion(self, instance: Instance) -> np.ndarray:
        """``start + proc_time`` for every operation."""
        return self.start + self.durations(instance)

    def restricted(self, jobs: int) -> Schedule:
        """The schedule of the first *jobs* jobs only."""
        return Schedule(self.assign[:jobs], self.start[:jobs], self.status[:jobs])

    def to_dict(self, instance: Instance | None = None) -> dict[str, Any]:
        """Render the schedule in its JSON shape.

        Args:
            instance: When given, an ``objective`` summary block is included.
        """
        data: dict[str, Any] = {
            "assign": self.assign.tolist(),
            "start": self.start.tolist(),
            "status": [[OpStatus(v).name for v in row] for row in self.status.tolist()],
        }
        if instance is not None:
            objective = evaluate(instance, self)
            data["objective"] = {
                "total_tardiness": objective.total_tardiness,
                "makespan": objective.makespan,
                "wt": instance.wt,
                "value": objective.value,
                "peak_power": power_profile(instance, self).peak,
                "q_max": instance.q_max,
            }
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Schedule:
        """Build a schedule from its JSON shape; ``status`` defaults to all ACTIVE."""
        status = data.get("status")
        if status is not None:
            status = [[OpStatus[name] for name in row] for row in status]
        return cls(assign=data["assign"], start=data["start"], status=status)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Schedule):
            return NotImplemented
        return (
            np.array_equal(self.assign, other.assign)
            and np.array_equal(self.start, other.start, equal_nan=True)
            and np.array_equal(self.status, other.status)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Objective:
    """The weighted objective ``wt * total_tardiness + makespan``."""

    total_tardiness: float
    makespan: float
    value: float

    @classmethod
    def of(cls, total_tardiness: float, makespan: float, wt: float) -> Objective:
        return cls(
            total_tardiness=float(total_tardiness),
            makespan=float(makespan),
            value=float(wt * total_tardiness + makespan),
        )


@dataclass(frozen=True)
class PowerProfile:
    """Piecewise-constant total power over time.

    Attributes:
        breakpoints: ``(time, power)`` pairs in increasing time; the power holds
            from that time until the next breakpoint. The last breakpoint is
            always at power 0.
        peak: Largest power on any segment, 0 for an empty profile.
    """

    breakpoints: tuple[tuple[float, float], ...]
    peak: float

    def segments(self) -> list[tuple[float, float, float]]:
        """``(start, end, power)`` for every segment with nonzero power."""
        return [
            (t0, t1, level)
            for (t0, level), (t1, _) in zip(self.breakpoints, self.breakpoints[1:])
            if level > TIME_EPSILON
        ]

    def value_at(self, t: float) -> float:
        """Total power drawn at time *t*."""
        level = 0.0
        for time, power in self.breakpoints:
            if time > t:
                break
            level = power
        return level


@dataclass(frozen=True)
class Violation:
    """One broken constraint.

    Attributes:
        kind: ``assignment``, ``release``, ``precedence``, ``exclusivity``,
            ``peak_power``, ``rescheduling_point`` or ``frozen``.
        message: Human-readable description.
        ops: The ``(job, stage)`` operations involved.
    """

    kind: str
    message: str
    ops: tuple[tuple[int, int], ...] = ()


def _check_shape(instance: Instance, schedule: Schedule) -> None:
    if schedule.assign.shape != (instance.n_jobs, instance.g):
        raise InvalidScheduleError(
            f"schedule covers {schedule.assign.shape}, "
            f"instance needs {(instance.n_jobs, instance.g)}"
        )


def evaluate(instance: Instance, schedule: Schedule) -> Objective:
    """Score a schedule: total tardiness, makespan and the weighted value.

    Tardiness of a job is how far its last-stage completion overruns its due
    date, never negative; the makespan is the latest last-stage completion.

    Raises:
        InvalidScheduleError: If an operation has no machine or start time.
    """
    _check_shape(instance, schedule)
    if not schedule.is_complete():
        missing = np.argwhere((schedule.assign < 0) | ~np.isfinite(schedule.start))
        raise InvalidScheduleError(
            f"{len(missing)} operation(s) unassigned, first at job {missing[0][0]} "
            f"stage {missing[0][1]}"
        )
    if instance.n_jobs == 0:
        return Objective.of(0.0, 0.0, instance.wt)
    finish = schedule.completion(instance)[:, -1]
    tardiness = np.maximum(finish - instance.due, 0.0).sum()
    return Objective.of(tardiness, finish.max(), instance.wt)


def power_profile(instance: Instance, schedule: Schedule) -> PowerProfile:
    """Total power drawn over time by every assigned operation.

    Each operation adds its power over ``[start, completion)``. Deltas falling
    on the same instant are netted before the level is recorded, so an
    operation ending at ``t`` and another starting at ``t`` never stack.
    """
    assigned = (schedule.assign >= 0) & np.isfinite(schedule.start)
    if not assigned.any():
        return PowerProfile(breakpoints=(), peak=0.0)
    starts = schedule.start[assigned]
    ends = schedule.completion(instance)[assigned]
    draws = schedule.powers(instance)[assigned]

    events = sorted(
        [(start, draw) for start, draw in zip(starts.tolist(), draws.tolist())]
        + [(end, -draw) for end, draw in zip(ends.tolist(), draws.tolist())]
    )
    # Instants closer than TIME_EPSILON are one instant.
    deltas: dict[float, float] = {}
    anchor = None
    for time, delta in events:
        if anchor is None or time - anchor > TIME_EPSILON:
            anchor = time
        deltas[anchor] = deltas.get(anchor, 0.0) + delta

    breakpoints: list[tuple[float, float]] = []
    level = 0.0
    for time in sorted(deltas):
        level += deltas[time]
        if abs(level) < TIME_EPSILON:
            level = 0.0
        if breakpoints and breakpoints[-1][1] == level:
            continue
        breakpoints.append((time, level))
    peak = max((power for _, power in breakpoints), default=0.0)
    return PowerProfile(breakpoints=tuple(breakpoints), peak=peak)


def validate(
    instance: Instance,
    schedule: Schedule,
    context: ReschedulingContext | None = None,
) -> list[Violation]:
    """List every constraint *schedule* breaks; empty means feasible.

    Checks release times, stage precedence within each job, one operation at a
    time per machine, the peak-power bound and, given a rescheduling *context*,
    that every ACTIVE operation starts no earlier than the rescheduling point and
    every non-pending operation is carried over from the original plan unchanged.
    """
    if schedule.assign.shape != (instance.n_jobs, instance.g):
        return [
            Violation(
                "assignment",
                f"schedule covers {schedule.assign.shape}, "
                f"instance needs {(instance.n_jobs, instance.g)}",
            )
        ]
    unassigned = [
        (int(j), int(s))
        for j, s in np.argwhere(
            (schedule.assign < 0) | (schedule.assign >= instance.o) | ~np.isfinite(schedule.start)
        )
    ]
    if unassigned:
        message = "operation without a valid machine or start"
        return [Violation("assignment", message, tuple(unassigned))]

    eps = TIME_EPSILON
    violations: list[Violation] = []
    start = schedule.start
    finish = schedule.completion(instance)

    for j in range(instance.n_jobs):
        if start[j, 0] < instance.release[j] - eps:
            violations.append(
                Violation(
                    "release",
                    f"job {j} starts at {start[j, 0]:.4f} "
                    f"before its release {instance.release[j]:.4f}",
                    ((j, 0),),
                )
            )
        for s in range(1, instance.g):
            if start[j, s] < finish[j, s - 1] - eps:
                violations.append(
                    Violation(
                        "precedence",
                        f"job {j} stage {s} starts at {start[j, s]:.4f} before stage {s - 1} "
                        f"completes at {finish[j, s - 1]:.4f}",
                        ((j, s - 1), (j, s)),
                    )
                )

    violations.extend(_exclusivity_violations(instance, schedule, finish))

    profile = power_profile(instance, schedule)
    for seg_start, seg_end, level in profile.segments():
        if level > instance.q_max + eps:
            violations.append(
                Violation(
                    "peak_power",
                    f"power {level:g} exceeds q_max {instance.q_max:g} "
                    f"over [{seg_start:.4f}, {seg_end:.4f})",
                )
            )

    if context is not None:
        violations.extend(_context_violations(schedule, context))
    return violations


def _exclusivity_violations(
    instance: Instance, schedule: Schedule, finish: np.ndarray
) -> list[Violation]:
    by_machine: dict[tuple[int, int], list[tuple[float, float, int]]] = {}
    for j in range(instance.n_jobs):
        for s in range(instance.g):
            key = (s, int(schedule.assign[j, s]))
            interval = (float(schedule.start[j, s]), float(finish[j, s]), j)
            by_machine.setdefault(key, []).append(interval)

    violations = []
    for (s, m), ops in by_machine.items():
        ops.sort()
        latest_end, latest_job = ops[0][1], ops[0][2]
        for op_start, op_end, job in ops[1:]:
            if op_start < latest_end - TIME_EPSILON:
                violations.append(
                    Violation(
                        "exclusivity",
                        f"jobs {latest_job} and {job} overlap on stage {s} machine {m}",
                        ((latest_job, s), (job, s)),
                    )
                )
            if op_end > latest_end:
                latest_end, latest_job = op_end, job
    return violations


def _context_violations(schedule: Schedule, context: ReschedulingContext) -> list[Violation]:
    violations = []
    pending = context.pending_mask
    if pending.shape != schedule.assign.shape:
        message = f"context covers {pending.shape}, schedule {schedule.assign.shape}"
        return [Violation("frozen", message)]

    for j, s in np.argwhere(pending):
        j, s = int(j), int(s)
        if schedule.start[j, s] < context.rs - TIME_EPSILON:
            violations.append(
                Violation(
                    "rescheduling_point",
                    f"job {j} stage {s} starts at {schedule.start[j, s]:.4f} "
                    f"before RS {context.rs:.4f}",
                    ((j, s),),
                )
            )
        if schedule.status[j, s] != OpStatus.ACTIVE:
            message = f"pending job {j} stage {s} is marked FROZEN"
            violations.append(Violation("frozen", message, ((j, s),)))

    for j, s in np.argwhere(~pending):
        j, s = int(j), int(s)
        if (
            schedule.status[j, s] != OpStatus.FROZEN
            or schedule.assign[j, s] != context.fixed_machine[j, s]
            or schedule.start[j, s] != context.fixed_start[j, s]
        ):
            violations.append(
                Violation(
                    "frozen",
                    f"job {j} stage {s} differs from the original plan",
                    ((j, s),),
                )
            )
    return violations

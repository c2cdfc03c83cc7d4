"""Reading and writing the files a run leaves behind.

Instances, schedules, reports, chromosome dumps and Gantt geometry are JSON;
convergence traces are CSV with the header
``generation,best_objective,mean_objective``.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from edffs.encoding import Chromosome
from edffs.ga.config import RunTrace, TraceRow
from edffs.model import Instance, InstanceError, InvalidScheduleError, Schedule, validate

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("generation", "best_objective", "mean_objective")


@dataclass(frozen=True)
class RunArtifacts:
    """Paths written by one ``solve`` run; unset outputs stay None."""

    instance: Path
    schedule: Path
    trace: Path | None = None
    gantt: Path | None = None
    gantt_json: Path | None = None
    chromosome: Path | None = None

    def outputs(self) -> list[tuple[str, str]]:
        """``(label, path)`` of every file written."""
        labelled = [
            ("Schedule", self.schedule),
            ("Trace", self.trace),
            ("Gantt", self.gantt),
            ("Gantt geometry", self.gantt_json),
            ("Chromosome", self.chromosome),
        ]
        return [(label, str(path)) for label, path in labelled if path is not None]


def write_json(path: str | Path, data: Any) -> Path:
    path = Path(path).expanduser()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, allow_nan=False) + "\n", encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).expanduser().read_text(encoding="utf-8"))


def write_instance(path: str | Path, instance: Instance) -> Path:
    return write_json(path, instance.to_dict())


def load_instance(path: str | Path) -> Instance:
    """Read an instance JSON file.

    Raises:
        InstanceError: If the file is not an instance object or breaks an invariant.
    """
    data = read_json(path)
    if not isinstance(data, dict):
        raise InstanceError(f"{path} does not hold a JSON object")
    return Instance.from_dict(data)


def write_schedule(path: str | Path, schedule: Schedule, instance: Instance) -> Path:
    """Write a schedule with its objective summary."""
    return write_json(path, schedule.to_dict(instance))


def load_schedule(path: str | Path, instance: Instance | None = None) -> Schedule:
    """Read a schedule JSON file, validating it against *instance* when given.

    Raises:
        InvalidScheduleError: If the schedule breaks a constraint of *instance*.
    """
    schedule = Schedule.from_dict(read_json(path))
    if instance is not None:
        violations = validate(instance, schedule)
        if violations:
            raise InvalidScheduleError(
                f"{path}: {len(violations)} violation(s), first: {violations[0].message}"
            )
    return schedule


def write_trace(path: str | Path, trace: RunTrace) -> Path:
    path = Path(path).expanduser()
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_COLUMNS)
        for row in trace.rows:
            writer.writerow([row.generation, repr(row.best_objective), repr(row.mean_objective)])
    logger.info("Wrote %s", path)
    return path


def load_trace(path: str | Path, engine: str = "") -> RunTrace:
    trace = RunTrace(engine=engine)
    with open(Path(path).expanduser(), newline="", encoding="utf-8") as f:
        for record in csv.DictReader(f):
            trace.rows.append(
                TraceRow(
                    int(record["generation"]),
                    float(record["best_objective"]),
                    float(record["mean_objective"]),
                )
            )
    return trace


def write_chromosome(path: str | Path, chromosome: Chromosome) -> Path:
    return write_json(path, chromosome.to_dict())


def load_chromosome(path: str | Path) -> Chromosome:
    return Chromosome.from_dict(read_json(path))

"""Predictive-reactive rescheduling when new jobs arrive.

A plan is made for the original jobs first. At the rescheduling point
everything already finished or running stays as planned, and two policies
handle the new arrivals:

* the *dynamic* policy reschedules every operation that has not started,
  original or new, from scratch (:func:`reschedule`);
* the *static* policy keeps the whole original plan and fits the new jobs in
  after it (:func:`static_baseline`).

:func:`compare` runs both over a set of seeds and reports how much the dynamic
policy gains.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from edffs.constants import ARRIVAL_STREAM_KEY, DUE_SLACK_HIGH, GENERATED_POWER
from edffs.encoding import freeze, pin_original, static_context
from edffs.ga import GAConfig, RunTrace, run_engine
from edffs.instgen import mean_processing_time
from edffs.model import Instance, Schedule, evaluate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Arrivals:
    """New jobs, ready to append to an instance."""

    release: np.ndarray
    due: np.ndarray
    proc_time: np.ndarray
    power: np.ndarray

    @property
    def count(self) -> int:
        return int(self.release.size)


@dataclass(frozen=True)
class DynamicScenario:
    """An original plan, a rescheduling point and the jobs that arrive at it.

    Attributes:
        instance: The instance with the arrivals appended.
        original: Plan covering the original jobs only.
        rs_ratio: Rescheduling point as a fraction of the original makespan.
        rs: The rescheduling point in time units.
        seed: Seed that drew the plan and the arrivals.
    """

    instance: Instance
    original: Schedule
    rs_ratio: float
    rs: float
    seed: int

    @property
    def arrivals(self) -> int:
        return self.instance.n_prime


@dataclass
class ComparisonRun:
    seed: int
    static_objective: float
    dynamic_objective: float
    static_trace: RunTrace
    dynamic_trace: RunTrace


@dataclass
class ComparisonReport:
    """Static against dynamic policy at one rescheduling ratio."""

    rs_ratio: float
    runs: list[ComparisonRun] = field(default_factory=list)

    @property
    def static_mean(self) -> float:
        return float(np.mean([run.static_objective for run in self.runs]))

    @property
    def dynamic_mean(self) -> float:
        return float(np.mean([run.dynamic_objective for run in self.runs]))

    @property
    def improvement_ratio(self) -> float:
        """``static_mean / dynamic_mean``; 1 when both are zero."""
        static, dynamic = self.static_mean, self.dynamic_mean
        if dynamic == 0:
            return 1.0 if static == 0 else math.inf
        return static / dynamic

    def to_dict(self) -> dict[str, Any]:
        """Report row; an unbounded ratio is written as null."""
        ratio = self.improvement_ratio
        return {
            "ratio": self.rs_ratio,
            "static_mean": self.static_mean,
            "dynamic_mean": self.dynamic_mean,
            "improvement_ratio": ratio if math.isfinite(ratio) else None,
            "runs": len(self.runs),
        }


def plan_original(
    instance: Instance, config: GAConfig, workers: int = 1, engine: str = "hybrid"
) -> Schedule:
    """Plan the original jobs with every operation free and every machine idle."""
    originals = instance.originals() if instance.n_prime else instance
    schedule, _ = run_engine(engine, originals, static_context(originals), config, workers)
    return schedule


def sample_arrivals(
    instance: Instance, rs: float, count: int, rng: np.random.Generator
) -> Arrivals:
    """Draw *count* new jobs released within one mean job length after *rs*.

    New jobs copy job 0's processing times and draw unit power. Each due date
    leaves between one and three mean job lengths after release.
    """
    if count < 0:
        raise ValueError(f"arrival count cannot be negative, got {count}")
    mean_length = mean_processing_time(instance)
    release = rs + rng.uniform(0.0, mean_length, size=count)
    sigma = rng.uniform(0.0, DUE_SLACK_HIGH, size=count)
    shape = (count, instance.g, instance.o)
    return Arrivals(
        release=release,
        due=release + mean_length * (1.0 + sigma),
        proc_time=np.broadcast_to(instance.proc_time[0], shape).copy(),
        power=np.full(shape, GENERATED_POWER),
    )


def arrival_stream(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(ARRIVAL_STREAM_KEY,)))


def build_scenario(
    instance: Instance,
    rs_ratio: float,
    config: GAConfig,
    seed: int,
    workers: int = 1,
) -> DynamicScenario:
    """Plan *instance*, place the rescheduling point and draw the arrivals.

    ``floor(rs_ratio * n)`` jobs arrive, *seed* driving both the plan and the
    arrival draw.
    """
    if not 0.0 < rs_ratio < 1.0:
        raise ValueError(f"rs_ratio must lie in (0, 1), got {rs_ratio}")
    base = instance.originals() if instance.n_prime else instance
    original = plan_original(base, config.with_overrides(seed=seed), workers)
    rs = rs_ratio * evaluate(base, original).makespan
    count = math.floor(rs_ratio * base.n)
    arrivals = sample_arrivals(base, rs, count, arrival_stream(seed))
    logger.info("Scenario seed %d: rs=%.3f with %d arrival(s)", seed, rs, count)
    return DynamicScenario(
        instance=base.with_arrivals(
            arrivals.release, arrivals.due, arrivals.proc_time, arrivals.power
        ),
        original=original,
        rs_ratio=rs_ratio,
        rs=rs,
        seed=seed,
    )


def _check_rs(instance: Instance, original_schedule: Schedule, rs: float) -> None:
    makespan = evaluate(instance.originals(), original_schedule.restricted(instance.n)).makespan
    if not 0.0 < rs < makespan:
        logger.warning("rs=%g lies outside the original plan (0, %g)", rs, makespan)


def reschedule(
    instance: Instance,
    original_schedule: Schedule,
    rs: float,
    config: GAConfig,
    workers: int = 1,
    engine: str = "hybrid",
) -> tuple[Schedule, RunTrace]:
    """Dynamic policy: reschedule every operation that has not started by *rs*.

    Returns:
        The merged schedule, finished and running operations FROZEN exactly as
        planned, and the engine's trace.
    """
    _check_rs(instance, original_schedule, rs)
    context = freeze(instance, original_schedule, rs)
    logger.info("Rescheduling %d pending operation(s) at rs=%g", context.pending_count, rs)
    return run_engine(engine, instance, context, config, workers)


def static_baseline(
    instance: Instance,
    original_schedule: Schedule,
    rs: float,
    config: GAConfig,
    workers: int = 1,
    engine: str = "hybrid",
) -> tuple[Schedule, RunTrace]:
    """Static policy: keep the original plan whole and schedule only the arrivals.

    Each machine becomes free once its last original operation completes,
    and the original operations keep drawing power where they were planned.
    """
    _check_rs(instance, original_schedule, rs)
    context = pin_original(instance, original_schedule, rs)
    return run_engine(engine, instance, context, config, workers)


def compare(
    instance: Instance,
    rs_ratio: float,
    config: GAConfig,
    seeds: list[int],
    workers: int = 1,
    engine: str = "hybrid",
) -> ComparisonReport:
    """Run both policies on one scenario per seed and collect their objectives."""
    report = ComparisonReport(rs_ratio=rs_ratio)
    for seed in seeds:
        scenario = build_scenario(instance, rs_ratio, config, seed, workers)
        run_config = config.with_overrides(seed=seed)
        static, static_trace = static_baseline(
            scenario.instance, scenario.original, scenario.rs, run_config, workers, engine
        )
        dynamic, dynamic_trace = reschedule(
            scenario.instance, scenario.original, scenario.rs, run_config, workers, engine
        )
        report.runs.append(
            ComparisonRun(
                seed=seed,
                static_objective=evaluate(scenario.instance, static).value,
                dynamic_objective=evaluate(scenario.instance, dynamic).value,
                static_trace=static_trace,
                dynamic_trace=dynamic_trace,
            )
        )
    logger.info(
        "rs_ratio %.2f: static %.3f, dynamic %.3f, improvement %.3f",
        rs_ratio,
        report.static_mean,
        report.dynamic_mean,
        report.improvement_ratio,
    )
    return report

"""Random instance generation.

Every job shares one processing-time table: a time per (stage, machine) drawn
once and copied to all jobs. Every operation draws one unit of power. Release
times fall within one mean job length of time 0, and each due date leaves
between one and three mean job lengths after release.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from edffs.constants import (
    DEFAULT_SEED,
    DEFAULT_WT,
    DUE_SLACK_HIGH,
    GENERATED_POWER,
    PROC_TIME_HIGH,
    PROC_TIME_LOW,
)
from edffs.model import Instance, InstanceError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenSpec:
    """Size and seed of a generated instance.

    Attributes:
        integer: Draw processing times from ``{1, ..., 5}`` instead of the
            continuous range; small integer instances suit the exact solver.
    """

    n: int
    g: int
    o: int
    q_max: float
    wt: float = DEFAULT_WT
    seed: int = DEFAULT_SEED
    integer: bool = False

    def __post_init__(self) -> None:
        if self.n < 1 or self.g < 1 or self.o < 1:
            raise InstanceError(f"need n, g, o >= 1, got n={self.n} g={self.g} o={self.o}")
        if self.q_max < GENERATED_POWER:
            raise InstanceError(f"q_max must be at least {GENERATED_POWER:g}, got {self.q_max}")


def mean_processing_time(instance: Instance) -> float:
    """Mean job length: the per-stage machine average, summed over stages.

    Averages run over all jobs too, which changes nothing for generated
    instances where every job shares one table.
    """
    if instance.n_jobs == 0:
        return 0.0
    return float(instance.proc_time.mean(axis=(0, 2)).sum())


def generate(spec: GenSpec) -> Instance:
    """Draw an instance from *spec*; the same spec always gives the same instance."""
    rng = np.random.default_rng(spec.seed)
    if spec.integer:
        table = rng.integers(int(PROC_TIME_LOW), int(PROC_TIME_HIGH) + 1, size=(spec.g, spec.o))
    else:
        table = rng.uniform(PROC_TIME_LOW, PROC_TIME_HIGH, size=(spec.g, spec.o))
    table = table.astype(float)
    mean_length = float(table.mean(axis=1).sum())

    release = rng.uniform(0.0, mean_length, size=spec.n)
    sigma = rng.uniform(0.0, DUE_SLACK_HIGH, size=spec.n)
    due = release + mean_length * (1.0 + sigma)

    instance = Instance(
        n=spec.n,
        n_prime=0,
        g=spec.g,
        o=spec.o,
        proc_time=np.broadcast_to(table, (spec.n, spec.g, spec.o)),
        power=np.full((spec.n, spec.g, spec.o), GENERATED_POWER),
        q_max=spec.q_max,
        wt=spec.wt,
        release=release,
        due=due,
    )
    logger.info(
        "Generated instance n=%d g=%d o=%d q_max=%g (mean job length %.3f, seed %d)",
        spec.n,
        spec.g,
        spec.o,
        spec.q_max,
        mean_length,
        spec.seed,
    )
    return instance

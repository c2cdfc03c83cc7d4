"""Shared pytest fixtures.

The worked example is a six-job, three-stage, two-machine shop with unit
power and a peak bound of 3. Processing times are 1, 2 and 3 for the three
stages on either machine. Two jobs arrive after the plan starts and the shop
reschedules at time 7. Due dates are not part of the published example, so
every job here is due ten time units after its release.
"""

from __future__ import annotations

import numpy as np
import pytest

from edffs.constants import FROZEN
from edffs.encoding import Chromosome, freeze
from edffs.model import Instance, Schedule
from tests.factories import SLOW_ENV, slow_enabled


def pytest_collection_modifyitems(config, items):
    if slow_enabled():
        return
    skip = pytest.mark.skip(reason=f"set {SLOW_ENV}=1 to run experiment reproductions")
    for item in items:
        if item.get_closest_marker("slow"):
            item.add_marker(skip)


EXAMPLE_RS = 7.0

ORIGINAL_RELEASE = [0.80, 1.42, 3.54, 3.77, 4.91, 2.45]
ARRIVAL_RELEASE = [7.77, 7.49]

EXAMPLE_MACHINES = [
    [1, 1, 0],
    [0, 0, 1],
    [0, 1, 1],
    [0, 1, 0],
    [1, 1, 1],
    [0, 0, 0],
]

EXAMPLE_STARTS = [
    [0.80, 1.80, 3.80],
    [1.42, 2.42, 4.42],
    [6.80, 9.91, 11.91],
    [3.77, 7.91, 12.42],
    [4.91, 5.91, 7.91],
    [2.45, 7.42, 9.42],
]

_ = FROZEN
EXAMPLE_X = [
    [_, _, _],
    [_, _, _],
    [_, 1, 0],
    [_, 1, 1],
    [_, _, 0],
    [_, 0, 0],
    [1, 1, 1],
    [0, 0, 0],
]

EXAMPLE_Y = [
    [_, _, _],
    [_, _, _],
    [_, 4, 2],
    [_, 10, 6],
    [_, _, 12],
    [_, 9, 3],
    [8, 13, 11],
    [1, 5, 7],
]


def _shop(jobs: int) -> tuple[np.ndarray, np.ndarray]:
    proc = np.broadcast_to(np.array([1.0, 2.0, 3.0])[None, :, None], (jobs, 3, 2))
    return proc, np.ones((jobs, 3, 2))


@pytest.fixture
def original_instance() -> Instance:
    proc, power = _shop(6)
    release = np.array(ORIGINAL_RELEASE)
    return Instance(
        n=6,
        n_prime=0,
        g=3,
        o=2,
        proc_time=proc,
        power=power,
        q_max=3,
        wt=100,
        release=release,
        due=release + 10,
    )


@pytest.fixture
def example_instance(original_instance) -> Instance:
    """The worked example with its two arrivals appended."""
    proc, power = _shop(2)
    release = np.array(ARRIVAL_RELEASE)
    return original_instance.with_arrivals(release, release + 10, proc, power)


@pytest.fixture
def original_schedule() -> Schedule:
    return Schedule(EXAMPLE_MACHINES, EXAMPLE_STARTS)


@pytest.fixture
def example_context(example_instance, original_schedule):
    return freeze(example_instance, original_schedule, EXAMPLE_RS)


@pytest.fixture
def example_chromosome() -> Chromosome:
    return Chromosome(EXAMPLE_X, EXAMPLE_Y)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)

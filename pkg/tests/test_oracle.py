"""Tests for the exact solver."""

from __future__ import annotations

import logging

import numpy as np
import pytest

from edffs.constants import FROZEN
from edffs.encoding import freeze, static_context
from edffs.ga import ENGINES, GAConfig, run_engine
from edffs.instgen import GenSpec, generate
from edffs.model import Instance, evaluate, validate
from edffs.oracle import (
    OracleLimit,
    OracleLimitError,
    brute_force,
    interleavings,
    order_priorities,
    search_space_size,
)
from tests.factories import random_instance, slow

TINY = GAConfig(grid_w=4, grid_h=4, island_w=2, island_h=2, generations=5, migration_interval=2)

#: The hybrid engine at the size used to check it against exact optima.
CHECKED = GAConfig(grid_w=16, grid_h=16, island_w=4, island_h=4, generations=200)


def _shop(proc: list, o: int, q_max: float = 1.0, release=None) -> Instance:
    """Single-stage jobs with unit power; *proc* holds one row of *o* times per job."""
    jobs = len(proc)
    return Instance(
        n=jobs, n_prime=0, g=1, o=o,
        proc_time=np.array(proc, dtype=float).reshape(jobs, 1, o),
        power=np.ones((jobs, 1, o)),
        q_max=q_max, wt=1.0,
        release=release or [0.0] * jobs,
        due=[50.0] * jobs,
    )


class TestEnumeration:
    def test_interleavings_keep_chains_in_order(self):
        a, b, c = (0, 0), (0, 1), (1, 0)
        assert list(interleavings([[a, b], [c]])) == [(a, b, c), (a, c, b), (c, a, b)]

    def test_search_space(self):
        assert search_space_size(static_context(_shop([[2.0, 3.0]], o=2))) == 2
        assert search_space_size(static_context(_shop([[1.0], [1.0]], o=1))) == 2

    def test_search_space_counts_every_interleaving(self, rng):
        instance = random_instance(rng, n=3, g=2, o=2)
        assert search_space_size(static_context(instance)) == 2**6 * 90

    def test_order_priorities_reproduce_the_order(self):
        y = order_priorities(((1, 0), (0, 0), (0, 1)), (2, 2))
        assert y.tolist() == [[2, 1], [3, FROZEN]]


class TestBruteForce:
    def test_single_operation_takes_the_faster_machine(self):
        instance = _shop([[2.0, 3.0]], o=2)
        schedule, objective = brute_force(instance, static_context(instance))
        assert schedule.assign.tolist() == [[0]]
        assert objective.value == pytest.approx(2.0)

    def test_two_jobs_share_one_machine(self):
        instance = _shop([[1.0], [1.0]], o=1)
        schedule, objective = brute_force(instance, static_context(instance))
        assert objective.makespan == pytest.approx(2.0)
        assert validate(instance, schedule) == []

    def test_power_bound_serialises_parallel_machines(self):
        instance = _shop([[1.0, 1.0], [1.0, 1.0]], o=2, q_max=1.0)
        _, objective = brute_force(instance, static_context(instance))
        assert objective.makespan == pytest.approx(2.0)

    @pytest.mark.parametrize("seed", range(4))
    def test_no_engine_beats_the_optimum(self, seed):
        rng = np.random.default_rng(seed)
        instance = random_instance(rng, n=2, g=2, o=2)
        context = static_context(instance)
        _, optimum = brute_force(instance, context)
        for engine in ENGINES:
            schedule, _ = run_engine(engine, instance, context, TINY)
            assert optimum.value <= evaluate(instance, schedule).value + 1e-9

    def test_result_is_feasible_after_rescheduling(self, original_instance, original_schedule):
        context = freeze(original_instance, original_schedule, 11.0)
        schedule, objective = brute_force(original_instance, context)
        assert context.pending_count <= 8
        assert validate(original_instance, schedule, context) == []
        assert objective == evaluate(original_instance, schedule)

    def test_worker_count_does_not_change_the_answer(self, rng):
        instance = random_instance(rng, n=2, g=2, o=2)
        context = static_context(instance)
        single = brute_force(instance, context, workers=1)
        pooled = brute_force(instance, context, workers=2)
        assert single[0] == pooled[0]
        assert single[1] == pooled[1]

    def test_nothing_pending(self, original_instance, original_schedule):
        context = freeze(original_instance, original_schedule, 100.0)
        schedule, objective = brute_force(original_instance, context)
        np.testing.assert_array_equal(schedule.start, original_schedule.start)
        assert objective.makespan == pytest.approx(15.42)


class TestLimits:
    def test_too_many_pending_operations(self, example_instance, example_context):
        with pytest.raises(OracleLimitError, match="pending") as excinfo:
            brute_force(example_instance, example_context)
        assert excinfo.value.search_space == search_space_size(example_context)

    def test_search_space_cap(self, rng):
        instance = random_instance(rng, n=2, g=2, o=2)
        with pytest.raises(OracleLimitError, match="search space"):
            brute_force(instance, static_context(instance), OracleLimit(max_search_space=10))

    def test_time_budget(self, rng):
        instance = random_instance(rng, n=3, g=2, o=2)
        with pytest.raises(OracleLimitError, match="time budget"):
            brute_force(instance, static_context(instance), OracleLimit(time_budget=0.0))


class TestVisitedCount:
    @pytest.mark.parametrize("workers", [1, 2])
    def test_every_candidate_is_decoded_once(self, caplog, workers):
        instance = generate(GenSpec(n=2, g=2, o=2, q_max=1, seed=4, integer=True))
        context = static_context(instance)
        with caplog.at_level(logging.INFO, logger="edffs.oracle"):
            brute_force(instance, context, workers=workers)
        (record,) = [r for r in caplog.records if r.msg.startswith("Exact optimum")]
        assert record.args[1] == search_space_size(context) == 2**4 * 6


@slow
class TestHybridReachesTheOptimum:
    def test_on_tiny_integer_instances(self):
        runs = hits = 0
        for index in range(20):
            instance = generate(GenSpec(n=3, g=2, o=2, q_max=2, seed=100 + index, integer=True))
            context = static_context(instance)
            _, optimum = brute_force(instance, context)
            for seed in range(1, 21):
                config = CHECKED.with_overrides(seed=seed)
                schedule, trace = run_engine("hybrid", instance, context, config)
                value = evaluate(instance, schedule).value
                best = trace.best_values
                assert value >= optimum.value - 1e-9, "an engine beat the exact optimum"
                assert all(later <= earlier for earlier, later in zip(best, best[1:]))
                runs += 1
                hits += value <= optimum.value + 1e-9
        assert hits / runs >= 0.9

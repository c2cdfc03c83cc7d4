"""Tests for the hybrid engine and the two reference engines."""

from __future__ import annotations

import copy
from functools import partial

import numpy as np
import pytest

from edffs.encoding import freeze, static_context
from edffs.ga import ENGINES, GAConfig, run_engine
from edffs.ga.evaluation import Evaluator, WorkerPool
from edffs.ga.hybrid import evolve, initial_population, run_epoch
from edffs.model import evaluate, validate
from tests.factories import random_instance

SMALL = GAConfig(
    grid_w=4,
    grid_h=4,
    island_w=2,
    island_h=2,
    generations=6,
    migration_interval=2,
    seed=7,
)


@pytest.mark.parametrize("engine", sorted(ENGINES))
class TestEveryEngine:
    def test_result_is_feasible(self, engine, example_instance, example_context):
        schedule, _ = run_engine(engine, example_instance, example_context, SMALL)
        assert validate(example_instance, schedule, example_context) == []

    def test_trace_has_a_row_per_generation(self, engine, example_instance, example_context):
        _, trace = run_engine(engine, example_instance, example_context, SMALL)
        assert trace.engine == engine
        assert [row.generation for row in trace.rows] == list(range(SMALL.generations + 1))
        assert trace.e_max >= 10.0

    def test_best_so_far_never_worsens(self, engine, example_instance, example_context):
        _, trace = run_engine(engine, example_instance, example_context, SMALL)
        best = trace.best_values
        assert all(later <= earlier + 1e-9 for earlier, later in zip(best, best[1:]))

    def test_returned_schedule_matches_the_trace(self, engine, example_instance, example_context):
        schedule, trace = run_engine(engine, example_instance, example_context, SMALL)
        value = evaluate(example_instance, schedule).value
        assert trace.best_objective.value == pytest.approx(value)
        assert trace.best_values[-1] == pytest.approx(value)

    def test_same_seed_same_result(self, engine, example_instance, example_context):
        first, trace_a = run_engine(engine, example_instance, example_context, SMALL)
        second, trace_b = run_engine(engine, example_instance, example_context, SMALL)
        assert first == second
        assert trace_a.rows == trace_b.rows

    def test_nothing_pending(self, engine, original_instance, original_schedule):
        context = freeze(original_instance, original_schedule, 100.0)
        schedule, trace = run_engine(engine, original_instance, context, SMALL)
        np.testing.assert_array_equal(schedule.start, original_schedule.start)
        assert trace.rows == []
        assert trace.best_chromosome is None

    def test_zero_generations_keeps_the_initial_best(
        self, engine, example_instance, example_context
    ):
        config = SMALL.with_overrides(generations=0)
        schedule, trace = run_engine(engine, example_instance, example_context, config)
        assert len(trace.rows) == 1
        value = evaluate(example_instance, schedule).value
        assert value == pytest.approx(trace.rows[0].best_objective)


class TestWorkerCount:
    @pytest.mark.parametrize("engine", sorted(ENGINES))
    @pytest.mark.parametrize("workers", [2, 8])
    def test_outcome_matches_a_single_process(
        self, engine, workers, example_instance, example_context
    ):
        single, trace_single = run_engine(engine, example_instance, example_context, SMALL, 1)
        pooled, trace_pooled = run_engine(engine, example_instance, example_context, SMALL, workers)
        assert single == pooled
        assert trace_single.rows == trace_pooled.rows
        assert trace_single.best_chromosome == trace_pooled.best_chromosome


class TestHybrid:
    def test_an_island_evolves_on_its_own_between_migrations(
        self, example_instance, example_context
    ):
        evaluator = Evaluator(example_instance, example_context)
        with WorkerPool(evaluator) as pool:
            population = initial_population(example_context, SMALL, pool)
            stranger = initial_population(example_context, SMALL.with_overrides(seed=99), pool)
        epoch = partial(run_epoch, config=SMALL, e_max=population.e_max, generations=2)

        alone = epoch(evaluator, copy.deepcopy(population.islands[0]))
        neighbours = [copy.deepcopy(population.islands[0]), *stranger.islands[1:]]
        with WorkerPool(evaluator, 2) as pool:
            together = pool.map(epoch, neighbours)[0]

        assert together.best == alone.best
        assert together.objective_sums == alone.objective_sums
        assert [c.chromosome for c in together.island.cells] == [
            c.chromosome for c in alone.island.cells
        ]

    def test_seed_changes_the_search(self, rng):
        instance = random_instance(rng, n=6, g=3, o=3)
        context = static_context(instance)
        _, trace_a = evolve(instance, context, SMALL)
        _, trace_b = evolve(instance, context, SMALL.with_overrides(seed=8))
        assert trace_a.rows != trace_b.rows

    def test_initial_population_is_tiled(self, example_instance, example_context):
        evaluator = Evaluator(example_instance, example_context)
        with WorkerPool(evaluator) as pool:
            population = initial_population(example_context, SMALL, pool)
        assert len(population.islands) == 4
        assert population.size == 16
        assert [island.index for island in population.islands] == [0, 1, 2, 3]
        assert all(len(island.cells) == 4 for island in population.islands)
        assert all((island.width, island.height) == (2, 2) for island in population.islands)

    def test_fitness_uses_the_calibrated_ceiling(self, example_instance, example_context):
        evaluator = Evaluator(example_instance, example_context)
        with WorkerPool(evaluator) as pool:
            population = initial_population(example_context, SMALL, pool)
        for island in population.islands:
            for cell in island.cells:
                assert cell.fitness == pytest.approx(max(population.e_max - cell.objective, 0.0))
                assert cell.objective < population.e_max

    def test_one_island_runs_without_migration(self, example_instance, example_context):
        config = SMALL.with_overrides(island_w=4, island_h=4)
        schedule, trace = evolve(example_instance, example_context, config)
        assert validate(example_instance, schedule, example_context) == []
        assert len(trace.rows) == config.generations + 1


class TestRegistry:
    def test_unknown_engine(self, example_instance, example_context):
        with pytest.raises(ValueError, match="unknown engine"):
            run_engine("annealing", example_instance, example_context, SMALL)

    def test_registered_names(self):
        assert set(ENGINES) == {"hybrid", "classical", "cellular"}

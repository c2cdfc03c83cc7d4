"""Tests for edffs.dynamic: scenarios, both rescheduling policies and comparisons."""

from __future__ import annotations

import json
import logging
import math

import numpy as np
import pytest

from edffs.artifacts import write_json
from edffs.dynamic import (
    ComparisonReport,
    ComparisonRun,
    arrival_stream,
    build_scenario,
    compare,
    plan_original,
    reschedule,
    sample_arrivals,
    static_baseline,
)
from edffs.encoding import OpState, freeze, pin_original
from edffs.ga import GAConfig, RunTrace
from edffs.instgen import GenSpec, generate, mean_processing_time
from edffs.model import OpStatus, evaluate, validate
from edffs.oracle import brute_force
from tests.conftest import EXAMPLE_RS
from tests.factories import dynamic_case

TINY = GAConfig(grid_w=4, grid_h=4, island_w=2, island_h=2, generations=4, migration_interval=2)


@pytest.fixture
def generated():
    return generate(GenSpec(n=6, g=3, o=2, q_max=2, seed=3))


def _run(seed: int, static: float, dynamic: float) -> ComparisonRun:
    return ComparisonRun(seed, static, dynamic, RunTrace("hybrid"), RunTrace("hybrid"))


class TestSampleArrivals:
    def test_arrivals_follow_the_rescheduling_point(self, generated):
        mean_length = mean_processing_time(generated)
        arrivals = sample_arrivals(generated, 4.0, 5, np.random.default_rng(1))
        assert arrivals.count == 5
        assert ((arrivals.release >= 4.0) & (arrivals.release <= 4.0 + mean_length)).all()
        slack = arrivals.due - arrivals.release
        assert ((slack >= mean_length - 1e-9) & (slack <= 3 * mean_length + 1e-9)).all()

    def test_new_jobs_copy_the_first_job(self, generated):
        arrivals = sample_arrivals(generated, 1.0, 2, np.random.default_rng(1))
        np.testing.assert_array_equal(arrivals.proc_time[1], generated.proc_time[0])
        assert (arrivals.power == 1.0).all()

    def test_no_arrivals(self, generated):
        arrivals = sample_arrivals(generated, 1.0, 0, np.random.default_rng(1))
        assert arrivals.count == 0
        assert generated.with_arrivals(
            arrivals.release, arrivals.due, arrivals.proc_time, arrivals.power
        ).n_prime == 0

    def test_negative_count(self, generated):
        with pytest.raises(ValueError, match="negative"):
            sample_arrivals(generated, 1.0, -1, np.random.default_rng(1))

    def test_stream_is_reproducible(self):
        assert arrival_stream(4).random() == arrival_stream(4).random()


class TestBuildScenario:
    def test_scenario_shape(self, generated):
        scenario = build_scenario(generated, 0.5, TINY, seed=2)
        assert scenario.arrivals == 3
        assert scenario.instance.n == 6
        makespan = evaluate(generated, scenario.original).makespan
        assert scenario.rs == pytest.approx(0.5 * makespan)
        assert (scenario.instance.release[6:] >= scenario.rs).all()

    def test_small_ratio_can_mean_no_arrivals(self, generated):
        assert build_scenario(generated, 0.1, TINY, seed=2).arrivals == 0

    def test_same_seed_same_scenario(self, generated):
        first = build_scenario(generated, 0.4, TINY, seed=5)
        second = build_scenario(generated, 0.4, TINY, seed=5)
        assert first.instance == second.instance
        assert first.original == second.original

    @pytest.mark.parametrize("ratio", [0.0, 1.0, -0.2, 1.5])
    def test_ratio_must_be_inside_the_plan(self, generated, ratio):
        with pytest.raises(ValueError, match="rs_ratio"):
            build_scenario(generated, ratio, TINY, seed=1)

    def test_plan_covers_originals_only(self, example_instance):
        plan = plan_original(example_instance, TINY)
        assert plan.n_jobs == 6
        assert validate(example_instance.originals(), plan) == []


class TestReschedule:
    def test_worked_example_is_feasible(self, example_instance, original_schedule):
        schedule, trace = reschedule(example_instance, original_schedule, EXAMPLE_RS, TINY)
        context = freeze(example_instance, original_schedule, EXAMPLE_RS)
        assert validate(example_instance, schedule, context) == []
        assert trace.engine == "hybrid"

    def test_started_work_is_untouched(self, example_instance, original_schedule):
        schedule, _ = reschedule(example_instance, original_schedule, EXAMPLE_RS, TINY)
        context = freeze(example_instance, original_schedule, EXAMPLE_RS)
        started = context.state != OpState.PENDING
        np.testing.assert_array_equal(schedule.start[started], context.fixed_start[started])
        assert (schedule.status[started] == OpStatus.FROZEN).all()

    def test_pending_work_waits_for_the_rescheduling_point(
        self, example_instance, original_schedule
    ):
        schedule, _ = reschedule(example_instance, original_schedule, EXAMPLE_RS, TINY)
        active = schedule.status == OpStatus.ACTIVE
        assert (schedule.start[active] >= EXAMPLE_RS).all()

    def test_other_engines(self, example_instance, original_schedule):
        context = freeze(example_instance, original_schedule, EXAMPLE_RS)
        for engine in ("classical", "cellular"):
            schedule, trace = reschedule(
                example_instance, original_schedule, EXAMPLE_RS, TINY, engine=engine
            )
            assert trace.engine == engine
            assert validate(example_instance, schedule, context) == []

    def test_rs_past_the_plan_is_warned_about(self, example_instance, original_schedule, caplog):
        with caplog.at_level(logging.WARNING, logger="edffs.dynamic"):
            reschedule(example_instance, original_schedule, 30.0, TINY)
        assert "outside the original plan" in caplog.text


class TestStaticBaseline:
    def test_original_plan_is_kept_whole(self, example_instance, original_schedule):
        schedule, _ = static_baseline(example_instance, original_schedule, EXAMPLE_RS, TINY)
        np.testing.assert_array_equal(schedule.start[:6], original_schedule.start)
        np.testing.assert_array_equal(schedule.assign[:6], original_schedule.assign)

    def test_result_is_feasible(self, example_instance, original_schedule):
        schedule, _ = static_baseline(example_instance, original_schedule, EXAMPLE_RS, TINY)
        context = pin_original(example_instance, original_schedule, EXAMPLE_RS)
        assert validate(example_instance, schedule, context) == []
        assert validate(example_instance, schedule) == []

    def test_arrivals_wait_for_the_plan_to_clear_their_machines(
        self, example_instance, original_schedule
    ):
        schedule, _ = static_baseline(example_instance, original_schedule, EXAMPLE_RS, TINY)
        context = pin_original(example_instance, original_schedule, EXAMPLE_RS)
        for j in (6, 7):
            for s in range(3):
                m = schedule.assign[j, s]
                assert schedule.start[j, s] >= context.machine_free[s, m] - 1e-9


class TestComparisonReport:
    def test_means_and_ratio(self):
        report = ComparisonReport(0.4, [_run(1, 30.0, 20.0), _run(2, 50.0, 20.0)])
        assert report.static_mean == 40.0
        assert report.dynamic_mean == 20.0
        assert report.improvement_ratio == 2.0

    def test_both_zero(self):
        assert ComparisonReport(0.2, [_run(1, 0.0, 0.0)]).improvement_ratio == 1.0

    def test_only_dynamic_zero(self):
        assert math.isinf(ComparisonReport(0.2, [_run(1, 5.0, 0.0)]).improvement_ratio)

    def test_an_unbounded_ratio_is_written_as_null(self, tmp_path):
        data = ComparisonReport(0.2, [_run(1, 5.0, 0.0)]).to_dict()
        assert data["improvement_ratio"] is None
        path = write_json(tmp_path / "report.json", [data])
        assert "Infinity" not in path.read_text()
        assert json.loads(path.read_text())[0]["improvement_ratio"] is None

    def test_to_dict(self):
        data = ComparisonReport(0.6, [_run(1, 30.0, 15.0)]).to_dict()
        assert data == {
            "ratio": 0.6,
            "static_mean": 30.0,
            "dynamic_mean": 15.0,
            "improvement_ratio": 2.0,
            "runs": 1,
        }


class TestCompare:
    def test_one_run_per_seed(self, generated):
        report = compare(generated, 0.5, TINY, seeds=[1, 2])
        assert [run.seed for run in report.runs] == [1, 2]
        assert report.static_mean > 0
        assert report.improvement_ratio > 0

    def test_traces_are_kept(self, generated):
        report = compare(generated, 0.5, TINY, seeds=[3])
        run = report.runs[0]
        assert len(run.dynamic_trace.rows) == TINY.generations + 1
        assert run.static_trace.engine == "hybrid"


class TestExactPolicies:
    @pytest.mark.parametrize("seed", range(10))
    def test_rescheduling_is_never_worse_than_keeping_the_plan(self, seed):
        """Replanning can replay the kept plan, so its optimum is at least as good.

        The bound admits every operation at once; with a binding bound the
        decoder's jump to the next completion can break the replay.
        """
        rng = np.random.default_rng(seed)
        _, plan, grown, rs, context = dynamic_case(rng, n=2, arrivals=1, g=2, q_max=100.0)
        dynamic, _ = brute_force(grown, context)
        static, _ = brute_force(grown, pin_original(grown, plan, rs))
        assert evaluate(grown, dynamic).value <= evaluate(grown, static).value + 1e-9

"""Tests for edffs.experiments.

The ``slow`` tests reproduce the published experiments at full size and only
run with ``EDFFS_RUN_SLOW=1``.
"""

from __future__ import annotations

import os

import pytest

from edffs.constants import DEFAULT_RS_RATIOS, DEFAULT_WT_GRID
from edffs.dynamic import compare
from edffs.experiments import (
    BenchReport,
    BenchRow,
    WTRow,
    WTSweepReport,
    benchmark,
    parameter_sweep,
    wt_sweep,
)
from edffs.ga import GAConfig
from edffs.instgen import GenSpec, generate
from tests.factories import slow

TINY = GAConfig(grid_w=4, grid_h=4, island_w=2, island_h=2, generations=3, migration_interval=2)


@pytest.fixture
def generated():
    return generate(GenSpec(n=5, g=3, o=2, q_max=2, seed=6))


class TestBenchmark:
    def test_rows_per_engine_and_checkpoint(self, generated):
        report = benchmark(generated, ["hybrid", "classical"], [1, 2], TINY, checkpoints=[2, 4])
        assert [(row.engine, row.generation) for row in report.rows] == [
            ("hybrid", 2), ("hybrid", 4), ("classical", 2), ("classical", 4),
        ]
        assert len(report.traces["hybrid"]) == 2

    def test_runs_last_until_the_final_checkpoint(self, generated):
        report = benchmark(generated, ["cellular"], [1], TINY, checkpoints=[5, 1])
        assert report.traces["cellular"][0].rows[-1].generation == 5

    def test_later_checkpoints_are_no_worse(self, generated):
        report = benchmark(generated, ["hybrid"], [1, 2, 3], TINY, checkpoints=[1, 3])
        early, late = report.row("hybrid", 1), report.row("hybrid", 3)
        assert late.mean_objective <= early.mean_objective + 1e-9
        assert late.best_objective <= late.mean_objective

    def test_adequate_rate(self, generated):
        everything = benchmark(generated, ["hybrid"], [1], TINY, [1], adequate_level=1e12)
        nothing = benchmark(generated, ["hybrid"], [1], TINY, [1], adequate_level=0.0)
        assert everything.rows[0].adequate_rate == 1.0
        assert nothing.rows[0].adequate_rate == 0.0

    def test_needs_a_seed(self, generated):
        with pytest.raises(ValueError, match="seed"):
            benchmark(generated, ["hybrid"], [], TINY)

    def test_report_lookup_and_dict(self):
        report = BenchReport(200.0, [BenchRow("hybrid", 100, 150.0, 120.0, 0.5)])
        assert report.row("hybrid", 100).adequate_rate == 0.5
        with pytest.raises(KeyError):
            report.row("hybrid", 200)
        assert report.to_dict()["rows"][0] == {
            "engine": "hybrid",
            "generation": 100,
            "mean_objective": 150.0,
            "best_objective": 120.0,
            "adequate_rate": 0.5,
        }


class TestParameterSweep:
    def test_one_cell_per_pair(self, generated):
        cells = parameter_sweep(generated, [0.75, 0.9], [0.05, 0.1, 0.15], [1], TINY)
        assert [(c.crossover_rate, c.mutation_rate) for c in cells] == [
            (0.75, 0.05), (0.75, 0.1), (0.75, 0.15), (0.9, 0.05), (0.9, 0.1), (0.9, 0.15),
        ]
        assert all(cell.mean_objective > 0 for cell in cells)


class TestWTSweep:
    def test_rows_follow_the_weights(self, generated):
        report = wt_sweep(generated, [0.1, 10.0], [1, 2], TINY)
        assert [row.wt for row in report.rows] == [0.1, 10.0]
        for row in report.rows:
            expected = row.wt * row.mean_tardiness + row.mean_makespan
            assert row.mean_objective == pytest.approx(expected)

    def test_variances(self):
        report = WTSweepReport(
            [WTRow(1.0, 2.0, 10.0, 12.0), WTRow(2.0, 4.0, 12.0, 20.0), WTRow(3.0, 6.0, 14.0, 32.0)]
        )
        assert report.tardiness_variance == pytest.approx(4.0)
        assert report.makespan_variance == pytest.approx(4.0)

    def test_single_weight_has_no_variance(self):
        report = WTSweepReport([WTRow(1.0, 2.0, 10.0, 12.0)])
        assert report.tardiness_variance == 0.0
        assert report.to_dict()["makespan_variance"] == 0.0


def _small_shop():
    """Ten jobs over three stages of two machines, at most four operations at once."""
    return generate(GenSpec(n=10, g=3, o=2, q_max=4, seed=1))


def _never_worsens(trace) -> bool:
    best = trace.best_values
    return all(later <= earlier for earlier, later in zip(best, best[1:]))


@slow
class TestReproductions:
    """Full-size runs of the published experiments, 30 seeds each."""

    SEEDS = list(range(1, 31))
    WORKERS = os.cpu_count() or 1

    def test_engines_rank_hybrid_cellular_classical(self):
        engines = ["hybrid", "cellular", "classical"]
        report = benchmark(
            _small_shop(), engines, self.SEEDS, GAConfig(), checkpoints=[100], workers=self.WORKERS
        )
        means = [report.row(engine, 100).mean_objective for engine in engines]
        assert means[0] < means[1] < means[2]
        for engine in ("hybrid", "cellular"):
            assert all(_never_worsens(trace) for trace in report.traces[engine])

    def test_dynamic_gain_fades_as_rescheduling_comes_later(self):
        instance = _small_shop()
        ratios = []
        for ratio in DEFAULT_RS_RATIOS:
            report = compare(instance, ratio, GAConfig(), self.SEEDS, self.WORKERS)
            for run in report.runs:
                assert _never_worsens(run.static_trace) and _never_worsens(run.dynamic_trace)
            ratios.append(report.improvement_ratio)
        assert ratios[0] > 1.0
        assert all(later <= earlier for earlier, later in zip(ratios, ratios[1:]))
        assert 0.95 <= ratios[-1] <= 1.3

    def test_makespan_barely_moves_with_the_weight(self):
        report = wt_sweep(_small_shop(), DEFAULT_WT_GRID, self.SEEDS, GAConfig(), self.WORKERS)
        assert report.makespan_variance <= report.tardiness_variance / 10

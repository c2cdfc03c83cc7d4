"""Orchestration behind the CLI commands.

Each ``run_*`` function loads its inputs, runs the relevant engine or
experiment, writes the artifacts and returns the text summary the CLI prints.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path

from edffs.artifacts import (
    RunArtifacts,
    load_instance,
    load_schedule,
    write_chromosome,
    write_instance,
    write_json,
    write_schedule,
    write_trace,
)
from edffs.config import AppConfig
from edffs.dynamic import compare
from edffs.encoding import ReschedulingContext, freeze, pin_original, static_context
from edffs.experiments import benchmark, parameter_sweep, wt_sweep
from edffs.ga import GAConfig, RunTrace, load_ga_config, run_engine
from edffs.gantt import build_gantt, render_svg
from edffs.instgen import GenSpec, generate, mean_processing_time
from edffs.model import Instance, Schedule, evaluate, power_profile, validate
from edffs.oracle import OracleLimit, brute_force, search_space_size
from edffs.templating import render

logger = logging.getLogger(__name__)

#: Engine name that selects the exact solver instead of a genetic engine.
ORACLE_ENGINE = "oracle"


def resolve_ga_config(
    config: AppConfig,
    ga_config_path: str | Path | None = None,
    generations: int | None = None,
    seed: int | None = None,
) -> GAConfig:
    """GAConfig from TOML, then the JSON file, then the CLI flags, later winning."""
    ga = config.ga
    if ga_config_path:
        ga = load_ga_config(ga_config_path, base=ga)
    return ga.with_overrides(generations=generations, seed=seed)


def format_count(count: int) -> str:
    """*count* as written, or in scientific notation once it passes a million.

    Works on the integer's logarithm, so counts far beyond the float range print.
    """
    if count < 10**6:
        return str(count)
    exponent = math.log10(count)
    whole = int(exponent)
    return f"{10 ** (exponent - whole):.2f}e+{whole}"


def run_gen(spec: GenSpec, output: str | Path) -> tuple[Instance, str]:
    """Generate an instance, write it to *output* and describe it."""
    instance = generate(spec)
    path = write_instance(output, instance)
    k = instance.n_jobs * instance.g
    space = format_count(search_space_size(static_context(instance)))
    text = (
        f"Wrote {path}\n"
        f"Mean job length (P-bar): {mean_processing_time(instance):.4f}\n"
        f"Operations: {k} (search space {space})"
    )
    return instance, text


def _context(
    instance: Instance,
    original_path: str | Path | None,
    rs: float | None,
    static: bool,
) -> ReschedulingContext:
    if original_path is None:
        if rs is not None:
            raise ValueError("--rs needs --original, the plan to reschedule")
        return static_context(instance)
    if rs is None:
        raise ValueError("--original needs --rs, the rescheduling point")
    original = load_schedule(original_path, instance.originals())
    if static:
        return pin_original(instance, original, rs)
    return freeze(instance, original, rs)


@dataclass(frozen=True)
class SolveOptions:
    engine: str = "hybrid"
    output_dir: str | Path = "."
    name: str | None = None
    svg: bool = True
    json_gantt: bool = False
    dump_chromosome: bool = False
    original: str | Path | None = None
    rs: float | None = None
    static: bool = False


def run_solve(
    config: AppConfig,
    instance_path: str | Path,
    ga: GAConfig,
    options: SolveOptions,
    workers: int = 1,
) -> tuple[RunArtifacts, str]:
    """Solve one instance and write schedule, trace and Gantt files.

    Raises:
        OracleLimitError: If the exact solver is asked for a problem beyond its caps.
    """
    instance = load_instance(instance_path)
    context = _context(instance, options.original, options.rs, options.static)

    schedule: Schedule
    if options.engine == ORACLE_ENGINE:
        schedule, objective = brute_force(
            instance, context, OracleLimit.from_config(config.oracle), workers
        )
        trace = RunTrace(engine=ORACLE_ENGINE, best_objective=objective)
        trace.record(0, objective.value, objective.value)
    else:
        schedule, trace = run_engine(options.engine, instance, context, ga, workers)

    violations = validate(instance, schedule, context)
    if violations:
        raise RuntimeError(
            f"{options.engine} produced an infeasible schedule: {violations[0].message}"
        )

    stem = options.name or Path(instance_path).stem
    out = Path(options.output_dir).expanduser()
    schedule_path = write_schedule(out / f"{stem}.schedule.json", schedule, instance)
    trace_path = write_trace(out / f"{stem}.trace.csv", trace) if trace.rows else None
    chart = build_gantt(instance, schedule, options.rs)
    gantt_path = None
    if options.svg:
        gantt_path = out / f"{stem}.gantt.svg"
        gantt_path.write_text(render_svg(chart, config), encoding="utf-8")
        logger.info("Wrote %s", gantt_path)
    gantt_json = None
    if options.json_gantt:
        gantt_json = write_json(out / f"{stem}.gantt.json", chart.to_dict())
    chromosome_path = None
    if options.dump_chromosome and trace.best_chromosome is not None:
        chromosome_path = write_chromosome(out / f"{stem}.chromosome.json", trace.best_chromosome)

    artifacts = RunArtifacts(
        instance=Path(instance_path),
        schedule=schedule_path,
        trace=trace_path,
        gantt=gantt_path,
        gantt_json=gantt_json,
        chromosome=chromosome_path,
    )
    text = render(
        "solve_summary.txt",
        config,
        engine=options.engine,
        jobs=instance.n_jobs,
        stages=instance.g,
        machines=instance.o,
        pending=context.pending_count,
        objective=evaluate(instance, schedule),
        wt=instance.wt,
        peak=power_profile(instance, schedule).peak,
        q_max=instance.q_max,
        generations=ga.generations if options.engine != ORACLE_ENGINE else None,
        outputs=artifacts.outputs(),
    )
    return artifacts, text


def run_simulate(
    config: AppConfig,
    instance_path: str | Path,
    ga: GAConfig,
    rs_ratios: list[float],
    seeds: list[int],
    report_path: str | Path | None = None,
    workers: int = 1,
) -> tuple[list[dict], str]:
    """Compare static and dynamic rescheduling at each ratio."""
    instance = load_instance(instance_path)
    rows = [compare(instance, ratio, ga, seeds, workers).to_dict() for ratio in rs_ratios]
    if report_path:
        write_json(report_path, rows)
    text = render("simulate_summary.txt", config, rows=rows, runs=len(seeds))
    return rows, text


def run_wt_sweep(
    config: AppConfig,
    instance_path: str | Path,
    ga: GAConfig,
    wt_values: list[float],
    seeds: list[int],
    report_path: str | Path | None = None,
    workers: int = 1,
) -> tuple[dict, str]:
    instance = load_instance(instance_path)
    report = wt_sweep(instance, wt_values, seeds, ga, workers)
    data = report.to_dict()
    if report_path:
        write_json(report_path, data)
    text = render("wt_sweep_summary.txt", config, runs=len(seeds), **data)
    return data, text


def run_bench(
    config: AppConfig,
    instance_path: str | Path,
    ga: GAConfig,
    engines: list[str],
    seeds: list[int],
    checkpoints: list[int],
    report_path: str | Path | None = None,
    workers: int = 1,
) -> tuple[dict, str]:
    instance = load_instance(instance_path)
    report = benchmark(
        instance,
        engines,
        seeds,
        ga,
        checkpoints=checkpoints,
        adequate_level=config.experiment.adequate_level,
        workers=workers,
    )
    data = report.to_dict()
    if report_path:
        write_json(report_path, data)
    text = render("bench_summary.txt", config, runs=len(seeds), **data)
    return data, text


def run_sweep(
    config: AppConfig,
    instance_path: str | Path,
    ga: GAConfig,
    crossover_rates: list[float],
    mutation_rates: list[float],
    seeds: list[int],
    report_path: str | Path | None = None,
    workers: int = 1,
) -> tuple[dict, str]:
    """Mean objective of every crossover and mutation rate pair."""
    instance = load_instance(instance_path)
    cells = parameter_sweep(instance, crossover_rates, mutation_rates, seeds, ga, workers)
    best = min(cells, key=lambda cell: cell.mean_objective)
    data = {"cells": [asdict(cell) for cell in cells], "best": asdict(best)}
    if report_path:
        write_json(report_path, data)
    text = render("sweep_summary.txt", config, runs=len(seeds), **data)
    return data, text

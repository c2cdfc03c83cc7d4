"""Command-line interface for edffs."""

from __future__ import annotations

import logging
from typing import Any

import click

from edffs import __version__
from edffs.config import load_config, resolve_threads, write_default_config

logger = logging.getLogger(__name__)

ENGINE_CHOICES = ("hybrid", "classical", "cellular", "oracle")


class _CleanFailureGroup(click.Group):
    """A group whose commands report a failure instead of a traceback.

    Only an *unanticipated* exception is converted. ``ClickException``,
    ``Exit`` and ``Abort`` are re-raised untouched: a ``UsageError`` keeps its
    exit code 2 and a deliberate exit keeps its own code.

    The traceback is logged with ``exc_info`` at DEBUG, so ``edffs -v`` still
    prints it.
    """

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except (click.ClickException, click.exceptions.Exit, click.Abort):
            raise
        except Exception as exc:
            name = ctx.invoked_subcommand or ctx.info_name or "edffs"
            logger.debug("%s failed", name, exc_info=True)
            detail = f"{type(exc).__name__}: {exc}" if str(exc) else type(exc).__name__
            raise click.ClickException(
                f"{name} failed: {detail}\nRun `edffs -v {name}` for the full traceback."
            ) from exc


def _split(value: str | None, convert: type) -> list | None:
    if value is None:
        return None
    try:
        return [convert(part) for part in value.split(",") if part.strip()]
    except ValueError as exc:
        raise click.BadParameter(f"expected a comma-separated list: {exc}") from exc


def _float_list(ctx: click.Context, param: click.Parameter, value: str | None) -> list | None:
    return _split(value, float)


def _int_list(ctx: click.Context, param: click.Parameter, value: str | None) -> list | None:
    return _split(value, int)


def _rs_ratios(ctx: click.Context, param: click.Parameter, value: str | None) -> list | None:
    ratios = _split(value, float)
    for ratio in ratios or []:
        if not 0.0 < ratio < 1.0:
            raise click.BadParameter(f"{ratio:g} is not strictly between 0 and 1")
    return ratios


def _rates(ctx: click.Context, param: click.Parameter, value: str | None) -> list | None:
    rates = _split(value, float)
    for rate in rates or []:
        if not 0.0 <= rate <= 1.0:
            raise click.BadParameter(f"{rate:g} is not a rate in [0, 1]")
    return rates


def _seeds(ctx: click.Context, runs: int | None, seed: int | None) -> list[int]:
    return ctx.obj["config"].experiment.seeds(runs, seed)


def _with_ga_options(fn: Any) -> Any:
    """Add ``--ga-config`` and ``--generations`` to a command."""
    fn = click.option(
        "--generations",
        default=None,
        type=click.IntRange(min=0),
        help="Override the number of generations.",
    )(fn)
    return click.option(
        "--ga-config",
        "ga_config",
        default=None,
        type=click.Path(exists=True, dir_okay=False),
        help="GAConfig JSON file.",
    )(fn)


@click.group(cls=_CleanFailureGroup)
@click.option("-c", "--config", "config_path", default=None, help="Path to config file.")
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
@click.option("--threads", default=None, type=click.IntRange(min=1),
              help="Worker processes (default: $EDFFS_THREADS, config, then all cores).")
@click.version_option(version=__version__)
@click.pass_context
def main(ctx: click.Context, config_path: str | None, verbose: bool, threads: int | None) -> None:
    """Power-capped dynamic flexible flow shop scheduling."""
    ctx.ensure_object(dict)

    # Handlers before config, so a config that fails to load still logs its
    # traceback under -v.
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
        datefmt="%H:%M:%S",
    )

    config = load_config(config_path)
    ctx.obj["config"] = config
    ctx.obj["threads"] = resolve_threads(threads, config)

    if not verbose:
        logging.getLogger().setLevel(getattr(logging, str(config.log_level).upper(), logging.INFO))


@main.command()
@click.option("--jobs", required=True, type=click.IntRange(min=1), help="Original jobs (n).")
@click.option("--stages", required=True, type=click.IntRange(min=1), help="Stages (g).")
@click.option("--machines", required=True, type=click.IntRange(min=1),
              help="Machines per stage (o).")
@click.option("--qmax", required=True, type=click.FloatRange(min=1.0), help="Peak power bound.")
@click.option("--wt", default=100.0, show_default=True, type=click.FloatRange(min=0.0),
              help="Tardiness weight.")
@click.option("--seed", default=1, show_default=True, type=int, help="Random seed.")
@click.option("--integer", is_flag=True, help="Integer processing times in 1..5.")
@click.option("-o", "--output", default="instance.json", show_default=True, help="Instance file.")
def gen(
    jobs: int,
    stages: int,
    machines: int,
    qmax: float,
    wt: float,
    seed: int,
    integer: bool,
    output: str,
) -> None:
    """Generate a random instance."""
    from edffs.instgen import GenSpec
    from edffs.pipeline import run_gen

    spec = GenSpec(n=jobs, g=stages, o=machines, q_max=qmax, wt=wt, seed=seed, integer=integer)
    _, text = run_gen(spec, output)
    click.echo(text)


@main.command()
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.option("--engine", default="hybrid", show_default=True, type=click.Choice(ENGINE_CHOICES))
@_with_ga_options
@click.option("--seed", default=None, type=int, help="Override the GA seed.")
@click.option("-o", "--output-dir", default=".", show_default=True, help="Directory for outputs.")
@click.option("--name", default=None, help="Output file prefix (default: instance file stem).")
@click.option("--svg/--no-svg", default=True, show_default=True, help="Write a Gantt SVG.")
@click.option("--json-gantt", is_flag=True, help="Also write the Gantt geometry as JSON.")
@click.option("--dump-chromosome", is_flag=True, help="Write the best chromosome as JSON.")
@click.option("--original", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Original plan to reschedule (needs --rs).")
@click.option("--rs", default=None, type=click.FloatRange(min=0.0), help="Rescheduling point.")
@click.option("--static", is_flag=True,
              help="Keep the original plan whole; schedule arrivals only.")
@click.pass_context
def solve(
    ctx: click.Context,
    instance: str,
    engine: str,
    ga_config: str | None,
    generations: int | None,
    seed: int | None,
    output_dir: str,
    name: str | None,
    svg: bool,
    json_gantt: bool,
    dump_chromosome: bool,
    original: str | None,
    rs: float | None,
    static: bool,
) -> None:
    """Solve INSTANCE and write schedule, trace and Gantt chart."""
    from edffs.pipeline import SolveOptions, resolve_ga_config, run_solve

    if (original is None) != (rs is None):
        raise click.UsageError("--original and --rs go together.")
    if static and original is None:
        raise click.UsageError("--static needs --original and --rs.")

    config = ctx.obj["config"]
    ga = resolve_ga_config(config, ga_config, generations, seed)
    options = SolveOptions(
        engine=engine,
        output_dir=output_dir,
        name=name,
        svg=svg,
        json_gantt=json_gantt,
        dump_chromosome=dump_chromosome,
        original=original,
        rs=rs,
        static=static,
    )
    _, text = run_solve(config, instance, ga, options, workers=ctx.obj["threads"])
    click.echo(text, nl=False)


@main.command()
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.option("--rs-ratio", "rs_ratios", default=None, callback=_rs_ratios,
              help="Comma-separated ratios in (0, 1) (default: config).")
@click.option("--runs", default=None, type=click.IntRange(min=1), help="Seeds per ratio.")
@click.option("--seed", default=None, type=int, help="First seed.")
@_with_ga_options
@click.option("--report", default=None, help="Write the comparison report JSON here.")
@click.pass_context
def simulate(
    ctx: click.Context,
    instance: str,
    rs_ratios: list[float] | None,
    runs: int | None,
    seed: int | None,
    ga_config: str | None,
    generations: int | None,
    report: str | None,
) -> None:
    """Compare static and dynamic rescheduling of new arrivals."""
    from edffs.pipeline import resolve_ga_config, run_simulate

    config = ctx.obj["config"]
    ga = resolve_ga_config(config, ga_config, generations)
    _, text = run_simulate(
        config,
        instance,
        ga,
        rs_ratios or config.experiment.rs_ratios,
        _seeds(ctx, runs, seed),
        report_path=report,
        workers=ctx.obj["threads"],
    )
    click.echo(text, nl=False)


@main.command("wt-sweep")
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.option("--wt", "wt_values", default=None, callback=_float_list,
              help="Comma-separated tardiness weights (default: config).")
@click.option("--runs", default=None, type=click.IntRange(min=1), help="Seeds per weight.")
@click.option("--seed", default=None, type=int, help="First seed.")
@_with_ga_options
@click.option("--report", default=None, help="Write the sweep report JSON here.")
@click.pass_context
def wt_sweep(
    ctx: click.Context,
    instance: str,
    wt_values: list[float] | None,
    runs: int | None,
    seed: int | None,
    ga_config: str | None,
    generations: int | None,
    report: str | None,
) -> None:
    """Measure how tardiness and makespan respond to the tardiness weight."""
    from edffs.pipeline import resolve_ga_config, run_wt_sweep

    config = ctx.obj["config"]
    ga = resolve_ga_config(config, ga_config, generations)
    _, text = run_wt_sweep(
        config,
        instance,
        ga,
        wt_values or config.experiment.wt_grid,
        _seeds(ctx, runs, seed),
        report_path=report,
        workers=ctx.obj["threads"],
    )
    click.echo(text, nl=False)


@main.command()
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.option("--engines", default="hybrid,cellular,classical", show_default=True,
              help="Comma-separated engines to compare.")
@click.option("--checkpoints", default="100,200,300,400,500", show_default=True,
              callback=_int_list, help="Generations at which to summarize.")
@click.option("--runs", default=None, type=click.IntRange(min=1), help="Seeds per engine.")
@click.option("--seed", default=None, type=int, help="First seed.")
@click.option("--ga-config", "ga_config", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="GAConfig JSON file.")
@click.option("--report", default=None, help="Write the benchmark report JSON here.")
@click.pass_context
def bench(
    ctx: click.Context,
    instance: str,
    engines: str,
    checkpoints: list[int],
    runs: int | None,
    seed: int | None,
    ga_config: str | None,
    report: str | None,
) -> None:
    """Compare engines' solution quality over several seeds."""
    from edffs.ga import ENGINES
    from edffs.pipeline import resolve_ga_config, run_bench

    names = [name.strip() for name in engines.split(",") if name.strip()]
    unknown = [name for name in names if name not in ENGINES]
    if unknown or not names:
        raise click.BadParameter(
            f"unknown engine(s) {', '.join(unknown) or '(none given)'}; "
            f"choose from {', '.join(ENGINES)}",
            param_hint="--engines",
        )
    if not checkpoints or min(checkpoints) < 0:
        raise click.BadParameter("need nonnegative generation counts", param_hint="--checkpoints")

    config = ctx.obj["config"]
    ga = resolve_ga_config(config, ga_config)
    _, text = run_bench(
        config,
        instance,
        ga,
        names,
        _seeds(ctx, runs, seed),
        checkpoints,
        report_path=report,
        workers=ctx.obj["threads"],
    )
    click.echo(text, nl=False)


@main.command()
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.option("--crossover", "crossover_rates", default=None, callback=_rates,
              help="Comma-separated crossover rates (default: config).")
@click.option("--mutation", "mutation_rates", default=None, callback=_rates,
              help="Comma-separated mutation rates (default: config).")
@click.option("--runs", default=None, type=click.IntRange(min=1), help="Seeds per pair.")
@click.option("--seed", default=None, type=int, help="First seed.")
@_with_ga_options
@click.option("--report", default=None, help="Write the sweep report JSON here.")
@click.pass_context
def sweep(
    ctx: click.Context,
    instance: str,
    crossover_rates: list[float] | None,
    mutation_rates: list[float] | None,
    runs: int | None,
    seed: int | None,
    ga_config: str | None,
    generations: int | None,
    report: str | None,
) -> None:
    """Tune the hybrid engine's crossover and mutation rates."""
    from edffs.pipeline import resolve_ga_config, run_sweep

    config = ctx.obj["config"]
    ga = resolve_ga_config(config, ga_config, generations)
    _, text = run_sweep(
        config,
        instance,
        ga,
        crossover_rates or config.experiment.crossover_grid,
        mutation_rates or config.experiment.mutation_grid,
        _seeds(ctx, runs, seed),
        report_path=report,
        workers=ctx.obj["threads"],
    )
    click.echo(text, nl=False)


@main.command()
@click.option("--config-path", default=None, help="Where to create the config file.")
def init(config_path: str | None) -> None:
    """Create a default config file (an existing one is left alone)."""
    path = write_default_config(config_path)
    click.echo(f"Config file: {path}")


if __name__ == "__main__":
    main()

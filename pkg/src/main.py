import logging
from dataclasses import fields
from pathlib import Path

import click

from config import ConfigError, RunConfig, parse_config
from learner import new_model
from reporting import write_accuracy_csv, write_dot, write_sweep_csv
from sequences import (
    GeneratorError,
    ceiling,
    final_accuracy,
    run_experiment,
    sweep,
    windowed_accuracy,
)

_CLICK_TYPES = {int: click.INT, float: click.FLOAT, str: click.STRING}


def config_options(command):
    """Add one ``--kebab-case`` flag per :class:`RunConfig` field, plus ``--config``."""
    for field in reversed(fields(RunConfig)):
        command = click.option(
            "--" + field.name.replace("_", "-"),
            field.name,
            type=_CLICK_TYPES.get(field.type, click.STRING),
            default=None,
            help=f"default: {field.default}",
        )(command)
    return click.option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False),
        default=None,
        help="Flat 'key = value' config file.",
    )(command)


def load_config(options, config_path=None) -> RunConfig:
    text = Path(config_path).read_text(encoding="utf-8") if config_path else None
    try:
        return parse_config(options, text)
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc


def cmd_run(cfg: RunConfig) -> int:
    spec = cfg.generator_spec()
    model_config = cfg.model_config()
    model = new_model(model_config)
    try:
        reports = run_experiment(model_config, spec, model)
    except GeneratorError as exc:
        raise click.UsageError(str(exc)) from exc

    series = windowed_accuracy(reports, cfg.window)
    try:
        write_accuracy_csv(reports, series, cfg.accuracy_csv)
        write_dot(model.network.export_dot(cfg.dot_min_expectation), cfg.dot_file)
    except OSError as exc:
        raise click.ClickException(f"cannot write output: {exc}") from exc

    estimate = ceiling(spec, cross_check=True)
    click.echo(
        f"final_accuracy={final_accuracy(reports, cfg.window):.3f} ceiling={estimate.value:.3f}"
    )
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    if not cfg.m_values or not cfg.k_values:
        raise click.UsageError("sweep ranges must not be empty")
    try:
        cells = sweep(
            cfg.model_config(),
            cfg.m_values,
            cfg.k_values,
            n=cfg.n,
            alphabet=tuple(cfg.alphabet),
            seed=cfg.seed,
            jobs=cfg.jobs,
        )
    except GeneratorError as exc:
        raise click.UsageError(str(exc)) from exc

    try:
        write_sweep_csv(cells, cfg.sweep_csv)
    except OSError as exc:
        raise click.ClickException(f"cannot write output: {exc}") from exc

    for cell in cells:
        click.echo(
            f"m={cell.m} k={cell.k} final_accuracy={cell.final_accuracy:.3f} "
            f"ceiling={cell.ceiling:.3f}"
        )
    return 0


@click.group()
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for every step.")
def cli(verbose):
    """Temporal sequence learning experiments."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@config_options
@click.pass_context
def run(ctx, config_path, **options):
    """Train on one generated stream; write accuracy CSV and network DOT."""
    ctx.exit(cmd_run(load_config(options, config_path)))


@cli.command("sweep")
@config_options
@click.pass_context
def sweep_command(ctx, config_path, **options):
    """Run setting 2 over the m-values x k-values grid; write the grid CSV."""
    ctx.exit(cmd_sweep(load_config(options, config_path)))


if __name__ == "__main__":
    cli()

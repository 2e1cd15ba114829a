"""
Command line interface

    train     --config PATH --algo {erl|ddpg|ea|erl-ns} --seed N --steps B --out DIR
    compare   --runs DIR...
    aggregate --runs DIR... --out FILE
"""
from pathlib import Path
from typing import Optional, Tuple

import sys

import click
from loguru import logger
from pydantic import ValidationError

from config import settings
from config.erl_config import ARMS, TASK_PRESETS, apply_preset, build_config, load_config
from harness.compare import compare_runs, render_summary
from harness.runner import aggregate_runs, make_manifest, run_experiment
from utils.errors import ErlError


def setup_logging(level: str = settings.LOG_LEVEL):
    logger.remove()
    logger.add(sys.stderr, level=level,
               format="<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {message}")


def _fail(e: Exception):
    click.echo(f"error: {e}", err=True)
    sys.exit(1)


@click.group()
@click.option('--log-level', default=settings.LOG_LEVEL, show_default=True,
              help='loguru level for the console sink')
def cli(log_level: str):
    """Evolutionary reinforcement learning experiments"""
    setup_logging(log_level.upper())


@cli.command()
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None,
              help='JSON config file (empty or omitted: defaults)')
@click.option('--algo', type=click.Choice(ARMS), default='erl', show_default=True)
@click.option('--seed', type=click.IntRange(min=0), default=0, show_default=True)
@click.option('--steps', type=int, default=None, help='Step budget (overrides the config)')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None,
              help='Run directory (default: RUNS_DIR/<algo>-seed<N>)')
@click.option('--preset', type=click.Choice(sorted(TASK_PRESETS)), default=None,
              help='Overlay per-task psi/xi/omega')
@click.option('--workers', type=click.IntRange(min=1), default=None, help='Evaluation threads')
@click.option('--registry/--no-registry', default=False, show_default=True,
              help='Record the run in the SQL run registry')
def train(config_path: Optional[str], algo: str, seed: int, steps: Optional[int],
          out_dir: Optional[str], preset: Optional[str], workers: Optional[int], registry: bool):
    """Run one algorithm arm for one seed"""
    db = None
    try:
        config = load_config(config_path) if config_path else build_config({})
        if preset:
            config = apply_preset(config, preset)
        if workers is not None:
            config = build_config({**config.model_dump(), 'eval_workers': workers})
        manifest = make_manifest(arm=algo, seed=seed, step_budget=steps, config=config)

        if registry:
            from storage.database import RunDatabaseManager
            settings.DATA_DIR.mkdir(parents=True, exist_ok=True)
            db = RunDatabaseManager()

        run_dir = Path(out_dir) if out_dir else settings.RUNS_DIR / f"{algo}-seed{seed}"
        run_experiment(manifest, run_dir, db)
        click.echo(str(run_dir))
    except (ErlError, ValidationError) as e:
        _fail(e)
    finally:
        if db:
            db.close()


@cli.command()
@click.option('--runs', 'runs', multiple=True, type=click.Path(exists=True, file_okay=False),
              help='Run directory (repeatable)')
@click.argument('more_runs', nargs=-1, type=click.Path(exists=True, file_okay=False))
@click.option('--threshold', type=float, default=None, help='Solve threshold (default: from the runs)')
def compare(runs: Tuple[str, ...], more_runs: Tuple[str, ...], threshold: Optional[float]):
    """Per-arm steps-to-threshold and final-score table"""
    try:
        click.echo(render_summary(compare_runs([*runs, *more_runs], threshold)))
    except ErlError as e:
        _fail(e)


@cli.command()
@click.option('--runs', 'runs', multiple=True, type=click.Path(exists=True, file_okay=False))
@click.argument('more_runs', nargs=-1, type=click.Path(exists=True, file_okay=False))
@click.option('--interval', type=int, default=10_000, show_default=True)
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), required=True)
def aggregate(runs: Tuple[str, ...], more_runs: Tuple[str, ...], interval: int, out_path: str):
    """Mean and standard deviation of champion scores per step checkpoint"""
    try:
        rows = aggregate_runs([*runs, *more_runs], interval, out_path)
        click.echo(f"{len(rows)} checkpoints written to {out_path}")
    except ErlError as e:
        _fail(e)

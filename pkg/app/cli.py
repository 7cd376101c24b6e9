import functools
import logging
import sys
from pathlib import Path

import click

from app.dependencies import get_settings
from app.services.comparison_service import REFERENCE_RULES, ComparisonService
from app.services.experiment_service import ExperimentService
from app.services.oracle_service import OracleService
from app.services.problem_service import ProblemService
from app.utils.common import setup_logging
from app.utils.config_loader import load_run_config, parse_seed_overrides
from app.utils.csv_io import write_frame
from app.utils.exceptions import ConfigurationError, NumericError

logger = logging.getLogger(__name__)

EXIT_CONFIGURATION = 1
EXIT_DIVERGED = 2


def _handle_errors(command):
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (ConfigurationError, NumericError) as error:
            click.echo(f"error: {error}", err=True)
            sys.exit(EXIT_CONFIGURATION)
    return wrapper


def _scale_options(command):
    command = click.option("--seed-override", "seed_overrides", multiple=True, metavar="K=V",
                           help="Replace a [seeds] entry (weights, collocation, frequencies).")(command)
    command = click.option("--paper-scale", is_flag=True, help="Use the 3×100 network, 2·10⁴/500/10³ points and 10⁶ iterations.")(command)
    return command


@click.group()
@click.option("--verbose", is_flag=True, help="Log at DEBUG level.")
def cli(verbose):
    """Train and compare PINN boundary strategies for the 1D Neumann diffusion benchmarks."""
    setup_logging()
    if verbose:
        logging.getLogger("app").setLevel(logging.DEBUG)


@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False, path_type=Path))
@_scale_options
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Output directory (defaults to settings.output_dir).")
@_handle_errors
def run(config_path, paper_scale, seed_overrides, out_dir):
    """Train one run configuration."""
    settings = get_settings()
    config = load_run_config(config_path, paper_scale, parse_seed_overrides(seed_overrides), settings)
    metrics, params = ExperimentService.run_with_checkpoint(config)
    metrics = ExperimentService.save_run(metrics, params, out_dir or Path(settings.output_dir))
    click.echo(f"{config.label}: best_loss={metrics.best_loss:.6e} (iteration {metrics.best_loss_iteration}) "
               f"rel_l2={metrics.rel_l2} ms/iter={metrics.ms_per_iter:.3f}")
    if metrics.diverged:
        click.echo(f"{config.label} diverged", err=True)
        sys.exit(EXIT_DIVERGED)


@cli.command()
@click.argument("config_dir", type=click.Path(file_okay=False, exists=True, path_type=Path))
@click.option("--reference", type=click.Choice(REFERENCE_RULES), default="best_soft", show_default=True,
              help="How each problem's reference run is chosen.")
@click.option("--fixed-time", is_flag=True, help="Equalise wall-clock budgets to the soft-run probe.")
@click.option("--workers", type=int, default=None, help="Parallel worker processes.")
@_scale_options
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None)
@_handle_errors
def suite(config_dir, reference, fixed_time, workers, paper_scale, seed_overrides, out_dir):
    """Run every *.toml configuration in a directory; write each run's outputs and the comparison table."""
    settings = get_settings()
    paths = sorted(config_dir.glob("*.toml"))
    if not paths:
        raise ConfigurationError(f"No *.toml run configurations in {config_dir}")
    overrides = parse_seed_overrides(seed_overrides)
    configs = [load_run_config(path, paper_scale, overrides, settings) for path in paths]
    out_dir = out_dir or Path(settings.output_dir)
    table, metrics = ComparisonService.compare_suite(configs, reference, workers, fixed_time, out_dir)
    write_frame(table, out_dir / "comparison.csv")
    click.echo(table.to_string(index=False))
    if any(m.diverged for m in metrics):
        click.echo("at least one run diverged", err=True)
        sys.exit(EXIT_DIVERGED)


@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--warmup", type=int, default=None, help="Unmeasured iterations.")
@click.option("--iters", "measured_iters", type=int, default=None, help="Measured iterations (at least 10).")
@_scale_options
@_handle_errors
def probe(config_path, warmup, measured_iters, paper_scale, seed_overrides):
    """Measure mean milliseconds per training iteration."""
    config = load_run_config(config_path, paper_scale, parse_seed_overrides(seed_overrides))
    ms = ExperimentService.timing_probe(config, warmup, measured_iters)
    click.echo(f"{config.label}: {ms:.3f} ms/iteration")


@cli.command()
@click.argument("problem")
@click.option("--nx", type=int, default=None)
@click.option("--nt", type=int, default=None)
@click.option("--terms", type=int, default=None, help="Series truncation.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), default=None)
@_handle_errors
def oracle(problem, nx, nt, terms, out_path):
    """Dump the series solution of a built-in problem as (x, t, u) CSV."""
    settings = get_settings()
    solution = OracleService.solve(ProblemService.builtin_problem(problem), terms)
    frame = OracleService.grid_frame(solution, nx or settings.eval_nx, nt or settings.eval_nt)
    path = write_frame(frame, out_path or Path(settings.output_dir) / f"{problem}_oracle.csv")
    click.echo(f"{len(frame)} samples written to {path}")


if __name__ == "__main__":
    cli()

import logging
from concurrent.futures import Future
from importlib import resources
from pathlib import Path
from typing import Annotated

import typer
from rich import get_console
from rich.logging import RichHandler
from rich.progress import Progress
from rich.table import Table

from covshrink.exceptions import ConfigError, ExperimentFailedError, NumericalError
from covshrink.freeprob import verify_mp_scalar, verify_s_rect
from covshrink.model.experiment import ExperimentReport, load_config
from covshrink.model.processes import ExpDecayAuto, IdentityAuto, TwoPeakCross
from covshrink.model.results import MpCheckResult, SRectCheckResult
from covshrink.runner import ExperimentRunner, SeedOutcome

app = typer.Typer()
console = get_console()
logger = logging.getLogger(__name__)

STYLE_ERROR_MSG = "bold red"
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3
LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


def shipped_experiments_dir() -> Path:
    """
    Directory of the experiment profiles shipped with the package
    """
    return Path(str(resources.files("covshrink").joinpath("experiments")))


def complete_experiment_paths(incomplete: str):
    """
    List of the shipped experiment profiles
    """
    for profile in sorted(shipped_experiments_dir().glob("*.yaml")):
        if profile.name.startswith(incomplete):
            yield profile.name


def get_config_path(name: str) -> Path:
    """
    Get config path, names of shipped profiles are resolved if no such file exists
    :param name: path or name of a shipped profile
    :return: path of the profile
    """
    path = Path(name)
    if path.exists():
        return path
    for candidate in (name, f"{name}.yaml"):
        shipped = shipped_experiments_dir().joinpath(candidate)
        if shipped.is_file():
            return shipped
    return path


def parse_seeds(value: str | None) -> list[int] | None:
    """
    parse a comma separated list of seeds
    """
    if value is None:
        return None
    try:
        seeds = [int(part) for part in value.split(",") if part.strip()]
    except ValueError as exc:
        raise typer.BadParameter(f"Seeds must be comma separated integers, got {value!r}") from exc
    if not seeds:
        raise typer.BadParameter("At least one seed is required")
    return seeds


@app.callback()
def main(
    log_level: Annotated[
        str, typer.Option(help=f"Logging level, one of {', '.join(LOG_LEVELS)}", case_sensitive=False)
    ] = "WARNING",
):
    """
    Covariance cleaning for auto-correlated samples
    """
    level = log_level.upper()
    if level not in LOG_LEVELS:
        raise typer.BadParameter(f"Unknown log level {log_level}")
    logging.basicConfig(
        level=level, format="%(message)s", datefmt="[%X]", handlers=[RichHandler(console=console)], force=True
    )


@app.command()
def run(
    config: Annotated[
        str,
        typer.Option(help="The experiment profile to run", autocompletion=complete_experiment_paths),
    ],
    seeds: Annotated[str | None, typer.Option(help="Comma separated seeds overriding the profile")] = None,
    out: Annotated[Path | None, typer.Option(help="Output directory overriding the profile")] = None,
):
    """
    Run a synthetic experiment and write report.json and the plot-ready tables
    """
    seed_list = parse_seeds(seeds)
    try:
        experiment = load_config(get_config_path(config)).with_overrides(seeds=seed_list, output_dir=out)
    except ConfigError as exc:
        console.print(str(exc), style=STYLE_ERROR_MSG)
        raise typer.Exit(code=EXIT_CONFIG_ERROR) from exc
    except ValueError as exc:
        console.print(f"Invalid override: {exc}", style=STYLE_ERROR_MSG)
        raise typer.Exit(code=EXIT_CONFIG_ERROR) from exc
    console.print(f"Loaded experiment: {experiment.name} (N={experiment.n}, T={experiment.t}, q={experiment.q:g})")
    with Progress(*Progress.get_default_columns()) as progress:
        seed_task = progress.add_task("[green]Running seeds...", total=len(experiment.seeds))

        def update_progress(future: Future):
            """
            Update the progress bar
            """
            progress.advance(seed_task)
            outcome: SeedOutcome = future.result()
            if outcome.error is not None:
                progress.console.print(f"Seed {outcome.seed} failed: {outcome.error}", style=STYLE_ERROR_MSG)

        try:
            report = ExperimentRunner(experiment).run(seed_done_callback=update_progress)
        except ExperimentFailedError as exc:
            console.print(f"No seed completed: {exc}", style=STYLE_ERROR_MSG)
            raise typer.Exit(code=EXIT_NUMERICAL_ERROR) from exc
        except NumericalError as exc:
            console.print(str(exc), style=STYLE_ERROR_MSG)
            raise typer.Exit(code=EXIT_NUMERICAL_ERROR) from exc
    show_report(report)
    console.print(f"Results written to {experiment.output_dir}", style="bold green")


def show_report(report: ExperimentReport):
    """
    show the Frobenius ratios averaged over the seeds
    """
    table = Table(title=f"Frobenius ratios of {report.name} ({len(report.completed_seeds)} seeds)")
    table.add_column("Method", style="blue")
    table.add_column("Kind")
    table.add_column("Frobenius ratio", justify="right", style="green")
    table.add_column("Fitted parameters", justify="left")
    for method in report.methods:
        if method.frobenius_ratio_mean is None:
            ratio = "-"
        else:
            ratio = f"{method.frobenius_ratio_mean:.4f} ± {method.frobenius_ratio_std or 0.0:.4f}"
        fits = [entry.fit for entry in method.per_seed if entry.fit is not None]
        params = "; ".join(
            ", ".join(f"{name}={value:.3g}" for name, value in fit.best_params.items())
            + (f", T_eff={fit.t_eff:.0f}" if fit.t_eff is not None else "")
            for fit in fits
        )
        table.add_row(method.name, method.kind, ratio, params)
    console.print(table)
    for seed, error in report.failures.items():
        console.print(f"Seed {seed} failed: {error}", style=STYLE_ERROR_MSG)


@app.command(name="verify-mp")
def verify_mp(
    q: Annotated[float, typer.Option(help="ratio N / T", min=1e-3)] = 0.5,
    n: Annotated[int, typer.Option(help="number of variables N", min=2)] = 300,
    draws: Annotated[int, typer.Option(help="number of Monte Carlo draws", min=10)] = 50,
    tau: Annotated[float | None, typer.Option(help="exp-decay auto-correlation time, uncorrelated if omitted")] = None,
    high: Annotated[float, typer.Option(help="upper population eigenvalue, C = I if 1")] = 1.0,
    seed: Annotated[int, typer.Option(help="seed of the draws", min=0)] = 42,
):
    """
    Check the generalized Marčenko-Pastur equation by Monte Carlo
    """
    t = max(1, round(n / q))
    try:
        auto = IdentityAuto() if tau is None else ExpDecayAuto(tau=tau)
        cross = TwoPeakCross(low=1.0, high=high, fraction_high=0.5)
    except ValueError as exc:
        console.print(f"Invalid model parameters: {exc}", style=STYLE_ERROR_MSG)
        raise typer.Exit(code=EXIT_CONFIG_ERROR) from exc
    try:
        result = verify_mp_scalar(cross, auto, n, t, draws, seed)
    except NumericalError as exc:
        console.print(str(exc), style=STYLE_ERROR_MSG)
        raise typer.Exit(code=EXIT_NUMERICAL_ERROR) from exc
    show_mp_check(result, auto.label)


def show_mp_check(result: MpCheckResult, auto_label: str):
    table = Table(title=f"Marčenko-Pastur check, A = {auto_label}, q = {result.q:g}, {result.draws} draws")
    table.add_column("z", justify="right")
    table.add_column("|m_E(z) - m_C(Z)|", justify="right", style="green")
    for (real, imag), residual in zip(result.test_points, result.residuals, strict=True):
        table.add_row(f"{real:.3f}{imag:+.3f}i", f"{residual:.2e}")
    console.print(table)
    console.print(f"Max residual: {result.max_residual:.2e}")


@app.command(name="verify-srect")
def verify_srect(
    n: Annotated[int, typer.Option(help="number of rows N", min=2)] = 200,
    t: Annotated[int, typer.Option(help="number of columns T", min=2)] = 400,
    draws: Annotated[int, typer.Option(help="number of Monte Carlo draws", min=10)] = 100,
    seed: Annotated[int, typer.Option(help="seed of the draws", min=0)] = 42,
):
    """
    Check the rectangular S-transform relation and the Wishart S-transform by Monte Carlo
    """
    try:
        result = verify_s_rect(n, t, draws, seed)
    except NumericalError as exc:
        console.print(str(exc), style=STYLE_ERROR_MSG)
        raise typer.Exit(code=EXIT_NUMERICAL_ERROR) from exc
    show_s_rect_check(result)


def show_s_rect_check(result: SRectCheckResult):
    table = Table(title=f"S-transform check, q = {result.q:g}, {result.draws} draws")
    table.add_column("Check")
    table.add_column("Max residual", justify="right", style="green")
    table.add_row("S_WV(z) vs q(1+z)/(1+qz) S_VW(qz)", f"{result.max_residual:.2e}")
    table.add_row("S_W(z) vs 1/(1+qz)", f"{result.wishart_residual:.2e}")
    console.print(table)


if __name__ == "__main__":
    app()

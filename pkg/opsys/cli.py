import typer
from pydantic import ValidationError
from rich.console import Console
from rich.progress import (
    BarColumn,
    Progress,
    TaskProgressColumn,
    TextColumn,
    TimeElapsedColumn,
    TimeRemainingColumn,
)

import opsys.config as config
from opsys.datamodels import Command, OutputFormat, Report, RunConfig
from opsys.environment import load_environment, load_seed
from opsys.errors import ConfigError, OpsysError
from opsys.reporting import print_report, render, write_report
from opsys.suites import VerificationManager
from opsys.utils import parse_n_range, setup_logger

app = typer.Typer(help="Numerical verification of maps on operator systems.")
verify_app = typer.Typer(help="Sampling checks of the structural claims.")
app.add_typer(verify_app, name="verify")

CONFIG_ERROR_EXIT = 2


def _option_name(loc: tuple) -> str:
    if not loc:
        return "config"
    return "--" + str(loc[0]).replace("_", "-")


def _config_error(console: Console, messages: list[str]):
    for message in messages:
        console.print(f"[bold red]Configuration error[/bold red] {message}")
    raise typer.Exit(code=CONFIG_ERROR_EXIT)


def build_config(command: Command, n: str | None, **options) -> RunConfig:
    """Parse and validate the CLI options; raises ConfigError or ValidationError."""
    sizes = list(config.SUITE_N) if n is None else parse_n_range(n)
    seed = load_seed(options.pop("seed", None))
    return RunConfig(command=command, n=sizes, seed=seed, **options)


def _run_with_progress(manager: VerificationManager, console: Console) -> Report:
    items = manager.work_items()
    with Progress(
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        TimeElapsedColumn(),
        TimeRemainingColumn(),
        console=console,
    ) as progress:
        task = progress.add_task(
            f"Running {manager.config.command}...", total=len(items)
        )

        def advance(label: str):
            progress.update(task, description=label)
            progress.advance(task, advance=1)

        return manager.run(items, on_done=advance)


def execute(
    command: Command,
    n: str | None,
    dotenv_path: str | None,
    debug: bool,
    **options,
):
    setup_logger()
    output = options.get("output", OutputFormat.TEXT.value)
    to_stdout = output == OutputFormat.TEXT.value or options.get("output_path")
    console = Console(stderr=not to_stdout)

    try:
        load_environment(dotenv_path)
        run_config = build_config(command, n, **options)
    except ConfigError as e:
        _config_error(console, [str(e)])
    except ValidationError as e:
        _config_error(
            console,
            [f"{_option_name(err['loc'])}: {err['msg']}" for err in e.errors()],
        )

    manager = VerificationManager(run_config, console=console, debug=debug)
    with console.status("Planning work items..."):
        console.log(
            f"{run_config.command} for n in {run_config.n} (seed {run_config.seed})"
        )

    try:
        report = _run_with_progress(manager, console)
    except OpsysError as e:
        _config_error(console, [str(e)])

    if run_config.output_path:
        path = write_report(report, run_config.output_path, run_config.output)
        console.log(f"Report written to {path}")
    elif run_config.output is OutputFormat.TEXT:
        print_report(report, console)
    else:
        typer.echo(render(report, run_config.output))

    raise typer.Exit(code=report.exit_code)


@verify_app.command()
def lemma(
    n: str = typer.Option("2", help="Size n or inclusive range a..b"),
    field: str = typer.Option("both", help="real, complex or both"),
    trials: int = typer.Option(config.DEFAULT_TRIALS, help="Samples per system"),
    seed: int = typer.Option(None, help="Random seed (default: OPSYS_SEED or 0)"),
    tol_psd: float = typer.Option(config.TOL_PSD, help="Positivity tolerance"),
    output: str = typer.Option("text", help="text, json or csv"),
    output_path: str = typer.Option(None, help="Write the report to this file"),
    dotenv_path: str = typer.Option(None, help="Path to .env file"),
    debug: bool = typer.Option(
        False, "--debug", help="Enable debug logging to console"
    ),
):
    """Closed-form positivity criteria against the eigenvalue oracle."""
    execute(
        Command.VERIFY_LEMMA,
        n,
        dotenv_path,
        debug,
        field=field,
        trials=trials,
        seed=seed,
        tol_psd=tol_psd,
        output=output,
        output_path=output_path,
    )


@verify_app.command()
def maps(
    n: str = typer.Option("2", help="Size n or inclusive range a..b"),
    trials: int = typer.Option(config.DEFAULT_TRIALS, help="Samples per map"),
    seed: int = typer.Option(None, help="Random seed (default: OPSYS_SEED or 0)"),
    tol_identity: float = typer.Option(
        config.TOL_IDENTITY, help="Tolerance for identities"
    ),
    tol_psd: float = typer.Option(config.TOL_PSD, help="Positivity tolerance"),
    output: str = typer.Option("text", help="text, json or csv"),
    output_path: str = typer.Option(None, help="Write the report to this file"),
    dotenv_path: str = typer.Option(None, help="Path to .env file"),
    debug: bool = typer.Option(
        False, "--debug", help="Enable debug logging to console"
    ),
):
    """Structure, positivity and restrictions of every map."""
    execute(
        Command.VERIFY_MAPS,
        n,
        dotenv_path,
        debug,
        trials=trials,
        seed=seed,
        tol_identity=tol_identity,
        tol_psd=tol_psd,
        output=output,
        output_path=output_path,
    )


@verify_app.command()
def swapbc(
    n: str = typer.Option("2", help="Size n or inclusive range a..b"),
    trials: int = typer.Option(config.DEFAULT_TRIALS, help="Random instances"),
    seed: int = typer.Option(None, help="Random seed (default: OPSYS_SEED or 0)"),
    output: str = typer.Option("text", help="text, json or csv"),
    output_path: str = typer.Option(None, help="Write the report to this file"),
    dotenv_path: str = typer.Option(None, help="Path to .env file"),
    debug: bool = typer.Option(
        False, "--debug", help="Enable debug logging to console"
    ),
):
    """Singular values are unchanged when the scalar corners b and c swap."""
    execute(
        Command.VERIFY_SWAPBC,
        n,
        dotenv_path,
        debug,
        trials=trials,
        seed=seed,
        output=output,
        output_path=output_path,
    )


@verify_app.command()
def ks(
    n: str = typer.Option("2", help="Size n or inclusive range a..b"),
    trials: int = typer.Option(config.DEFAULT_TRIALS, help="Random instances"),
    seed: int = typer.Option(None, help="Random seed (default: OPSYS_SEED or 0)"),
    tol_identity: float = typer.Option(
        config.TOL_IDENTITY, help="Tolerance for identities"
    ),
    output: str = typer.Option("text", help="text, json or csv"),
    output_path: str = typer.Option(None, help="Write the report to this file"),
    dotenv_path: str = typer.Option(None, help="Path to .env file"),
    debug: bool = typer.Option(
        False, "--debug", help="Enable debug logging to console"
    ),
):
    """Kadison-Schwarz displays, candidates and the forcing step."""
    execute(
        Command.VERIFY_KS,
        n,
        dotenv_path,
        debug,
        trials=trials,
        seed=seed,
        tol_identity=tol_identity,
        output=output,
        output_path=output_path,
    )


@app.command()
def norm(
    map: str = typer.Option(..., "--map", help="phi, upsilon, upsilon-prime or gamma"),
    n: str = typer.Option("2", help="Size n or inclusive range a..b"),
    trials: int = typer.Option(
        config.DEFAULT_TRIALS, help="Samples for the closed-form bound"
    ),
    restarts: int = typer.Option(config.DEFAULT_RESTARTS, help="Optimizer restarts"),
    seed: int = typer.Option(None, help="Random seed (default: OPSYS_SEED or 0)"),
    tol_identity: float = typer.Option(
        config.TOL_IDENTITY, help="Tolerance for identities"
    ),
    output: str = typer.Option("text", help="text, json or csv"),
    output_path: str = typer.Option(None, help="Write the report to this file"),
    dotenv_path: str = typer.Option(None, help="Path to .env file"),
    debug: bool = typer.Option(
        False, "--debug", help="Enable debug logging to console"
    ),
):
    """Estimate the norm of a map with a multi-start search."""
    execute(
        Command.NORM,
        n,
        dotenv_path,
        debug,
        map=map,
        trials=trials,
        restarts=restarts,
        seed=seed,
        tol_identity=tol_identity,
        output=output,
        output_path=output_path,
    )


@app.command()
def certify(
    which: str = typer.Option(..., "--which", help="phi, upsilon or gamma"),
    n: str = typer.Option("2", help="Size n or inclusive range a..b"),
    trials: int = typer.Option(20, help="Samples for the forcing step of gamma"),
    seed: int = typer.Option(None, help="Random seed (default: OPSYS_SEED or 0)"),
    output: str = typer.Option("text", help="text, json or csv"),
    output_path: str = typer.Option(None, help="Write the report to this file"),
    dotenv_path: str = typer.Option(None, help="Path to .env file"),
    debug: bool = typer.Option(
        False, "--debug", help="Enable debug logging to console"
    ),
):
    """Certify that no positive unital extension exists."""
    execute(
        Command.CERTIFY,
        n,
        dotenv_path,
        debug,
        which=which,
        trials=trials,
        seed=seed,
        output=output,
        output_path=output_path,
    )


@app.command()
def suite(
    n: str = typer.Option(None, help="Size n or range a..b (default: 1-4, 8, 16, 17)"),
    field: str = typer.Option("both", help="real, complex or both"),
    trials: int = typer.Option(config.DEFAULT_TRIALS, help="Samples per check"),
    restarts: int = typer.Option(config.DEFAULT_RESTARTS, help="Optimizer restarts"),
    seed: int = typer.Option(None, help="Random seed (default: OPSYS_SEED or 0)"),
    tol_identity: float = typer.Option(
        config.TOL_IDENTITY, help="Tolerance for identities"
    ),
    tol_psd: float = typer.Option(config.TOL_PSD, help="Positivity tolerance"),
    output: str = typer.Option("text", help="text, json or csv"),
    output_path: str = typer.Option(None, help="Write the report to this file"),
    dotenv_path: str = typer.Option(None, help="Path to .env file"),
    debug: bool = typer.Option(
        False, "--debug", help="Enable debug logging to console"
    ),
):
    """Run every check and certificate."""
    execute(
        Command.SUITE,
        n,
        dotenv_path,
        debug,
        field=field,
        trials=trials,
        restarts=restarts,
        seed=seed,
        tol_identity=tol_identity,
        tol_psd=tol_psd,
        output=output,
        output_path=output_path,
    )


click_app = typer.main.get_command(app)

if __name__ == "__main__":
    app()

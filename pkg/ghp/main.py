# ghp/main.py
"""The main command line application for graphon Hawkes processes.

It initializes the Typer application, applies the global options (worker
threads, logging, progress) and assembles the command modules.
"""

import typer

from . import __version__
from .commands import distance, evaluate, learn, simulate
from .commands.common import ErrorReportingGroup, RunOptions
from .config import configure_logging

app = typer.Typer(
    name="ghp",
    cls=ErrorReportingGroup,
    help="Simulate, learn and evaluate graphon-based Hawkes processes.",
    no_args_is_help=True,
    add_completion=False,
    pretty_exceptions_enable=False,
)


def _show_version(value: bool):
    if value:
        typer.echo(__version__)
        raise typer.Exit()


@app.callback()
def main(
    ctx: typer.Context,
    threads: int | None = typer.Option(
        None, "--threads", min=1, help="Worker threads (GHP_THREADS overrides)."
    ),
    quiet: bool = typer.Option(
        False, "--quiet", "-q", help="Suppress progress bars and info logs."
    ),
    log_level: str | None = typer.Option(
        None, "--log-level", help="Logging level (default: GHP_LOG_LEVEL or INFO)."
    ),
    version: bool = typer.Option(
        False,
        "--version",
        callback=_show_version,
        is_eager=True,
        help="Print the version and exit.",
    ),
):
    """Handle the options shared by every command.

    Args:
        ctx (typer.Context): Click context; receives the run options.
        threads (int | None): Worker cap.
        quiet (bool): Quiet mode.
        log_level (str | None): Logging level name.
        version (bool): Print the version.

    """
    configure_logging(log_level, quiet)
    ctx.obj = RunOptions(threads=threads, quiet=quiet)


# Register the commands.
app.command("simulate")(simulate.simulate)
app.command("learn")(learn.learn)
app.command("distance")(distance.distance)
app.add_typer(evaluate.router, name="eval")

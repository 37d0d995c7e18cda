# ghp/commands/common.py
"""The module holds the plumbing shared by every command.

It includes the global run options, the decorator that turns library
failures into structured JSON errors with distinct exit codes, and the
helpers that record a run manifest next to each output file.
"""

import functools
import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import UTC, datetime
from pathlib import Path

import typer
from pydantic import BaseModel, ValidationError
from typer.core import TyperGroup

from .. import __version__
from ..errors import ConfigurationError, GHPError, SchemaError, StorageError
from ..schemas import RunManifest
from ..storage import file_digest, write_json, write_manifest


@dataclass
class RunOptions:
    """Global options given before the subcommand.

    Attributes:
        threads (int | None): Value of --threads.
        quiet (bool): Suppress progress bars.

    """

    threads: int | None = None
    quiet: bool = False


def options(ctx: typer.Context) -> RunOptions:
    """Run options stored by the root callback (defaults when invoked bare)."""
    return ctx.obj if isinstance(ctx.obj, RunOptions) else RunOptions()


def handle_errors(command):
    """Report failures as one JSON object on stderr and exit with its code.

    Library errors carry their own exit code; schema validation failures
    exit with 4 and file system failures with 3.
    """

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except GHPError as exc:
            error = exc
        except ValidationError as exc:
            error = SchemaError(str(exc))
        except OSError as exc:
            error = StorageError(str(exc))
        typer.echo(error.to_json(), err=True)
        raise typer.Exit(code=error.exit_code)

    return wrapper


# click's UsageError, which typer does not re-export.
UsageError = typer.BadParameter.__base__


@contextmanager
def _usage_errors():
    try:
        yield
    except UsageError as exc:
        if type(exc).__name__ == "NoArgsIsHelpError":
            raise
        error = ConfigurationError(exc.format_message())
        typer.echo(error.to_json(), err=True)
        raise typer.Exit(code=error.exit_code) from exc


class ErrorReportingGroup(TyperGroup):
    """Root command group whose usage errors follow the JSON error format.

    Unknown options, bad option values and missing commands are reported
    as a ConfigurationError (exit code 2) instead of the usage panel.
    """

    def make_context(self, info_name, args, parent=None, **extra):
        with _usage_errors():
            return super().make_context(info_name, args, parent=parent, **extra)

    def invoke(self, ctx):
        with _usage_errors():
            return super().invoke(ctx)


def validated(model, **values):
    """Build a configuration model; invalid values are usage errors."""
    try:
        return model(**values)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        raise ConfigurationError(f"{where}: {first['msg']}") from exc


# --- Manifests ---


@dataclass
class RunRecord:
    """Provenance collected while a command runs."""

    subcommand: str
    config: dict
    seed: int | None = None
    inputs: list[Path] = field(default_factory=list)
    started_at: str = field(
        default_factory=lambda: datetime.now(UTC).isoformat(timespec="seconds")
    )
    started: float = field(default_factory=time.perf_counter)

    def manifest(self) -> RunManifest:
        return RunManifest(
            subcommand=self.subcommand,
            config={
                key: str(value) if isinstance(value, Path) else value
                for key, value in self.config.items()
            },
            seed=self.seed,
            version=__version__,
            inputs={str(path): file_digest(path) for path in self.inputs},
            started_at=self.started_at,
            seconds=time.perf_counter() - self.started,
        )

    def finish(self, *outputs: Path | None) -> None:
        """Write a manifest next to every output that was produced."""
        manifest = self.manifest()
        for output in outputs:
            if output is not None:
                write_manifest(manifest, output)


def emit(payload, out: Path | None, record: RunRecord) -> None:
    """Write `payload` to `out` with its manifest, or print it to stdout."""
    if out is None:
        if isinstance(payload, BaseModel):
            typer.echo(payload.model_dump_json(indent=2))
        else:
            typer.echo(json.dumps(payload, indent=2))
        return
    write_json(payload, out)
    record.finish(out)

# ghp/errors.py
"""The module defines the exception hierarchy raised by the library.

Every error carries the process exit code the command line reports for it,
so the CLI can turn any library failure into a structured error object
without a lookup table.
"""

import json

# --- Exit codes ---

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SCHEMA = 4
EXIT_NUMERIC = 5


class GHPError(Exception):
    """Base class for all library errors.

    Attributes:
        detail (str): Human-readable description of the failure.
        exit_code (int): Exit code used by the command line.

    """

    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail

    def to_json(self) -> str:
        """Serialize the error as the JSON object written to stderr.

        Returns:
            str: A single-line JSON document.

        """
        return json.dumps(
            {
                "error": type(self).__name__,
                "detail": self.detail,
                "exit_code": self.exit_code,
            }
        )


# --- Usage and input errors ---


class ConfigurationError(GHPError, ValueError):
    """Invalid configuration value (horizon, grid size, forced size, ...)."""

    exit_code = EXIT_USAGE


class DomainError(GHPError, ValueError):
    """Coordinate outside [0, 1] or event type outside the model."""

    exit_code = EXIT_SCHEMA


class InputError(GHPError, ValueError):
    """Malformed numerical input: marginals, shapes, unsorted times."""

    exit_code = EXIT_SCHEMA


class SchemaError(GHPError):
    """A file parsed but violates its schema."""

    exit_code = EXIT_SCHEMA


class StorageError(GHPError):
    """A file could not be read or written."""

    exit_code = EXIT_IO


# --- Numerical errors ---


class StationarityError(GHPError):
    """The branching matrix has spectral radius at least one."""

    exit_code = EXIT_NUMERIC


class DegenerateLikelihoodError(GHPError):
    """An observed event has zero intensity, so the gradient does not exist."""

    exit_code = EXIT_NUMERIC


class TransportError(GHPError):
    """The Sinkhorn kernel underflowed for the requested regularization."""

    exit_code = EXIT_NUMERIC


class SimulationError(GHPError):
    """A simulation exceeded its event budget."""

    exit_code = EXIT_NUMERIC

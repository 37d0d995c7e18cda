# ghp/commands/simulate.py
"""The module defines the `simulate` command: sample a corpus of event
sequences from a graphon model file.
"""

import logging
from pathlib import Path

import typer

from ..errors import ConfigurationError
from ..graphon import sample_sequences
from ..models import Simulator
from ..seeding import generator
from ..storage import load_graphon, save_sequences
from .common import RunRecord, handle_errors, options

logger = logging.getLogger(__name__)


@handle_errors
def simulate(
    ctx: typer.Context,
    model: Path = typer.Option(..., "--model", help="Graphon model JSON."),
    count: int = typer.Option(..., "--count", help="Number of sequences."),
    horizon: float = typer.Option(50.0, "--horizon", help="Observation window T."),
    seed: int = typer.Option(0, "--seed", help="Root seed."),
    out: Path = typer.Option(..., "--out", help="Output JSONL corpus."),
    simulator: Simulator = typer.Option(
        Simulator.OGATA, "--simulator", help="Simulation algorithm."
    ),
):
    """Sample Hawkes models from a graphon and simulate one sequence each."""
    if count < 1:
        raise ConfigurationError(f"--count must be at least 1, got {count}")
    run = options(ctx)
    record = RunRecord(
        subcommand="simulate",
        config={
            "model": model,
            "count": count,
            "horizon": horizon,
            "out": out,
            "simulator": simulator.value,
        },
        seed=seed,
        inputs=[model],
    )
    params = load_graphon(model)
    corpus = sample_sequences(
        params, count, horizon, generator(seed), run.threads, simulator
    )
    sequences = [seq for _, seq in corpus]
    save_sequences(sequences, out)
    record.finish(out)
    logger.info(
        "Wrote %d sequences (%d events) to %s",
        len(sequences),
        sum(len(seq) for seq in sequences),
        out,
    )

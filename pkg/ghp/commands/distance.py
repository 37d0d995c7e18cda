# ghp/commands/distance.py
"""The module defines the `distance` command: the hierarchical transport
distance between two sequence files.
"""

from pathlib import Path

import typer

from ..schemas import DistanceOutput
from ..storage import load_sequences
from ..transport import hot_distance
from .common import RunRecord, emit, handle_errors, options


@handle_errors
def distance(
    ctx: typer.Context,
    first: Path = typer.Option(..., "--a", help="First corpus JSONL."),
    second: Path = typer.Option(..., "--b", help="Second corpus JSONL."),
    beta: float | None = typer.Option(None, "--beta", help="Outer regularization."),
    inner_beta: float | None = typer.Option(
        None, "--inner-beta", help="Inner regularization."
    ),
    aligned: bool = typer.Option(
        False, "--aligned", help="Compare same-index types instead of matching."
    ),
    plans: bool = typer.Option(False, "--plans", help="Include inner plans."),
    out: Path | None = typer.Option(None, "--out", help="Output JSON (or stdout)."),
):
    """Compute d_ot, the outer plan Q and the inner distance matrix."""
    run = options(ctx)
    record = RunRecord(
        subcommand="distance",
        config={
            "a": first,
            "b": second,
            "beta": beta,
            "inner_beta": inner_beta,
            "aligned": aligned,
            "plans": plans,
            "out": out,
        },
        inputs=[first, second],
    )
    result = hot_distance(
        load_sequences(first),
        load_sequences(second),
        beta=beta,
        inner_beta=inner_beta,
        threads=run.threads,
        aligned=aligned,
    )
    payload = DistanceOutput(
        d_ot=result.distance,
        Q=result.plan.matrix.tolist(),
        inner_D=result.inner_costs.values.tolist(),
        plans=(
            [[plan.matrix.tolist() for plan in row] for row in result.inner_plans]
            if plans
            else None
        ),
    )
    emit(payload, out, record)

# ghp/commands/learn.py
"""The module defines the `learn` command: fit a graphon to a corpus."""

import logging
from pathlib import Path

import typer

from ..learning import train
from ..models import LearnMethod
from ..schemas import LearnConfig
from ..storage import load_graphon, load_sequences, save_graphon, write_report_csv
from .common import RunRecord, handle_errors, options, validated

logger = logging.getLogger(__name__)


@handle_errors
def learn(
    ctx: typer.Context,
    train_file: Path = typer.Option(..., "--train", help="Training corpus JSONL."),
    epochs: int = typer.Option(20, "--epochs", help="Number of epochs."),
    lr: float = typer.Option(0.01, "--lr", help="Adam learning rate."),
    batch: int = typer.Option(10, "--batch", help="Batch size B."),
    vmax: str = typer.Option("auto", "--vmax", help="V_max, or 'auto'."),
    method: LearnMethod = typer.Option(
        LearnMethod.HOT, "--method", help="Reward: hot or raml."
    ),
    tau: float = typer.Option(1.0, "--tau", help="Temperature of the raml payoff."),
    beta: str = typer.Option(
        "auto", "--beta", help="Outer Sinkhorn regularization, or 'auto'."
    ),
    horizon: float | None = typer.Option(
        None, "--horizon", help="Generated horizon (default: largest in corpus)."
    ),
    order: int = typer.Option(5, "--order", help="Fourier order S."),
    freeze_g: bool = typer.Option(
        False, "--freeze-g", help="Keep g coefficients at zero; fit f only."
    ),
    seed: int = typer.Option(0, "--seed", help="Root seed."),
    ref_model: Path | None = typer.Option(
        None, "--ref-model", help="Ground-truth model for per-epoch d_fgw."
    ),
    validation: Path | None = typer.Option(
        None, "--validation", help="Validation corpus JSONL (best-epoch selection)."
    ),
    out: Path = typer.Option(..., "--out", help="Learned model JSON."),
    report: Path | None = typer.Option(None, "--report", help="Per-epoch CSV."),
):
    """Learn graphon parameters by reward-weighted maximum likelihood."""
    run = options(ctx)
    config = validated(
        LearnConfig,
        epochs=epochs,
        batch_size=batch,
        learning_rate=lr,
        v_max=vmax,
        sinkhorn_beta=beta,
        raml_tau=tau,
        horizon=horizon,
        seed=seed,
        method=method,
        order=order,
        learn_g=not freeze_g,
        threads=run.threads,
    )
    inputs = [path for path in (train_file, ref_model, validation) if path]
    record = RunRecord(
        subcommand="learn",
        config={
            **config.model_dump(mode="json"),
            "train": train_file,
            "ref_model": ref_model,
            "validation": validation,
            "out": out,
            "report": report,
        },
        seed=seed,
        inputs=inputs,
    )
    data = load_sequences(train_file)
    reference = load_graphon(ref_model) if ref_model else None
    held_out = load_sequences(validation) if validation else None
    result = train(
        data, config, reference=reference, validation=held_out, progress=not run.quiet
    )
    save_graphon(result.params, out)
    if report is not None:
        write_report_csv(result.to_frame(), report)
    record.finish(out, report)
    logger.info("Learned model written to %s", out)

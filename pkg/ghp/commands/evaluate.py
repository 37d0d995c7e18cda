# ghp/commands/evaluate.py
"""The module defines the `eval` command group.

It includes the model distance (fgw), the corpus distance (dot), latent type
alignment (align), aligned test likelihood (nll), guarantee verification
(verify), graphon discretization (graphon) and the synthetic protocol
(protocol).
"""

import logging
from pathlib import Path

import numpy as np
import typer

from ..config import (
    DEFAULT_BANDWIDTH,
    DEFAULT_FGW_ALPHA,
    DEFAULT_FGW_GRID,
    DEFAULT_FGW_ITERS,
    DEFAULT_GRAPHON_RESOLUTION,
    DEFAULT_KDE_GRID,
    DEFAULT_LIPSCHITZ_GRID,
)
from ..evaluation import (
    align_types,
    aligned_coordinates,
    discretize_graphon,
    match_generated,
    model_fgw,
    test_nll,
    verify_properties,
)
from ..experiments import protocol_frame, run_synthetic_protocol, summarize_protocol
from ..models import LearnMethod
from ..schemas import ProtocolConfig
from ..seeding import STREAM_EVAL, generator
from ..storage import load_graphon, load_sequences, write_json, write_report_csv
from .common import RunRecord, emit, handle_errors, options, validated

logger = logging.getLogger(__name__)

router = typer.Typer(
    name="eval",
    help="Evaluate graphon models and check their guarantees.",
    no_args_is_help=True,
)


def _generated_match(model, test, ngen, horizon, seed, threads):
    params = load_graphon(model)
    sequences = load_sequences(test)
    count = ngen or len(sequences)
    window = horizon or max((seq.horizon for seq in sequences), default=1.0)
    generated, result = match_generated(
        params, sequences, count, window, generator(seed, STREAM_EVAL), threads
    )
    return params, sequences, generated, result


# --- Model distance ---


@router.command("fgw")
@handle_errors
def fgw(
    model_a: Path = typer.Option(..., "--model-a", help="First model JSON."),
    model_b: Path = typer.Option(..., "--model-b", help="Second model JSON."),
    grid: int = typer.Option(DEFAULT_FGW_GRID, "--grid", help="Grid size N."),
    alpha: float = typer.Option(DEFAULT_FGW_ALPHA, "--alpha", help="Proximal weight."),
    iters: int = typer.Option(DEFAULT_FGW_ITERS, "--iters", help="Proximal steps."),
    out: Path | None = typer.Option(None, "--out", help="Output JSON (or stdout)."),
):
    """Fused Gromov-Wasserstein distance between two graphon models."""
    record = RunRecord(
        subcommand="eval fgw",
        config={
            "model_a": model_a,
            "model_b": model_b,
            "grid": grid,
            "alpha": alpha,
            "iters": iters,
            "out": out,
        },
        inputs=[model_a, model_b],
    )
    value = model_fgw(
        load_graphon(model_a), load_graphon(model_b), grid, alpha=alpha, iters=iters
    )
    emit({"d_fgw": value, "grid": grid}, out, record)


@router.command("dot")
@handle_errors
def dot(
    ctx: typer.Context,
    model: Path = typer.Option(..., "--model", help="Graphon model JSON."),
    test: Path = typer.Option(..., "--test", help="Test corpus JSONL."),
    ngen: int | None = typer.Option(
        None, "--ngen", help="Generated sequences (default: test size)."
    ),
    horizon: float | None = typer.Option(
        None, "--horizon", help="Generated horizon (default: largest test horizon)."
    ),
    seed: int = typer.Option(0, "--seed", help="Root seed."),
    out: Path | None = typer.Option(None, "--out", help="Output JSON (or stdout)."),
):
    """Transport distance between generated sequences and a test corpus."""
    run = options(ctx)
    record = RunRecord(
        subcommand="eval dot",
        config={
            "model": model,
            "test": test,
            "ngen": ngen,
            "horizon": horizon,
            "out": out,
        },
        seed=seed,
        inputs=[model, test],
    )
    _, _, generated, result = _generated_match(
        model, test, ngen, horizon, seed, run.threads
    )
    emit({"d_ot": result.distance, "n_gen": len(generated)}, out, record)


# --- Alignment ---


@router.command("align")
@handle_errors
def align(
    ctx: typer.Context,
    model: Path = typer.Option(..., "--model", help="Graphon model JSON."),
    test: Path = typer.Option(..., "--test", help="Test corpus JSONL."),
    ngen: int | None = typer.Option(None, "--ngen", help="Generated sequences."),
    horizon: float | None = typer.Option(None, "--horizon", help="Generated horizon."),
    seed: int = typer.Option(0, "--seed", help="Root seed."),
    bandwidth: float = typer.Option(
        DEFAULT_BANDWIDTH, "--bandwidth", help="Kernel bandwidth σ."
    ),
    grid: int = typer.Option(DEFAULT_KDE_GRID, "--grid", help="Density grid size."),
    all_pairs: bool = typer.Option(
        False, "--all-pairs", help="Pool landmarks over all test sequences."
    ),
    out: Path = typer.Option(..., "--out", help="Alignment JSON."),
):
    """Align real event types to graphon coordinates."""
    run = options(ctx)
    record = RunRecord(
        subcommand="eval align",
        config={
            "model": model,
            "test": test,
            "ngen": ngen,
            "horizon": horizon,
            "bandwidth": bandwidth,
            "grid": grid,
            "all_pairs": all_pairs,
            "out": out,
        },
        seed=seed,
        inputs=[model, test],
    )
    _, _, generated, result = _generated_match(
        model, test, ngen, horizon, seed, run.threads
    )
    results = align_types(
        result.plan,
        result.inner_plans,
        [hawkes.latent_x for hawkes, _ in generated],
        bandwidth=bandwidth,
        grid_n=grid,
        all_pairs=all_pairs,
    )
    write_json([item.to_record().model_dump() for item in results], out)
    record.finish(out)
    unaligned = sum(not item.aligned for item in results)
    logger.info("Aligned %d types (%d unaligned)", len(results), unaligned)


@router.command("nll")
@handle_errors
def nll(
    ctx: typer.Context,
    model: Path = typer.Option(..., "--model", help="Graphon model JSON."),
    test: Path = typer.Option(..., "--test", help="Test corpus JSONL."),
    ngen: int | None = typer.Option(None, "--ngen", help="Generated sequences."),
    horizon: float | None = typer.Option(None, "--horizon", help="Generated horizon."),
    seed: int = typer.Option(0, "--seed", help="Root seed."),
    bandwidth: float = typer.Option(
        DEFAULT_BANDWIDTH, "--bandwidth", help="Kernel bandwidth σ."
    ),
    grid: int = typer.Option(DEFAULT_KDE_GRID, "--grid", help="Density grid size."),
    out: Path | None = typer.Option(None, "--out", help="Output JSON (or stdout)."),
):
    """Align every test sequence, then score it by negative log-likelihood."""
    run = options(ctx)
    record = RunRecord(
        subcommand="eval nll",
        config={
            "model": model,
            "test": test,
            "ngen": ngen,
            "horizon": horizon,
            "bandwidth": bandwidth,
            "grid": grid,
            "out": out,
        },
        seed=seed,
        inputs=[model, test],
    )
    params, sequences, generated, result = _generated_match(
        model, test, ngen, horizon, seed, run.threads
    )
    results = align_types(
        result.plan,
        result.inner_plans,
        [hawkes.latent_x for hawkes, _ in generated],
        bandwidth=bandwidth,
        grid_n=grid,
    )
    scores = []
    for index, seq in enumerate(sequences):
        own = [item for item in results if item.sequence == index]
        coords = aligned_coordinates(own, seq.num_types)
        scores.append(test_nll(params, seq, coords))
    finite = [score for score in scores if np.isfinite(score)]
    payload = {
        "nll": [score if np.isfinite(score) else None for score in scores],
        "mean_nll": float(np.mean(finite)) if finite else None,
        "degenerate": len(scores) - len(finite),
    }
    emit(payload, out, record)


# --- Guarantees ---


@router.command("verify")
@handle_errors
def verify(
    ctx: typer.Context,
    model: Path = typer.Option(..., "--model", help="Graphon model JSON."),
    pairs: int = typer.Option(100, "--pairs", help="Number of model pairs."),
    seed: int = typer.Option(0, "--seed", help="Root seed."),
    equal_sizes: bool = typer.Option(
        False, "--equal-sizes", help="Draw both models of a pair with one size."
    ),
    lipschitz_grid: int = typer.Option(
        DEFAULT_LIPSCHITZ_GRID, "--lipschitz-grid", help="Grid of the constants."
    ),
    out: Path | None = typer.Option(None, "--out", help="Report JSON (or stdout)."),
):
    """Check stationarity, Lipschitz and average-intensity bounds."""
    run = options(ctx)
    record = RunRecord(
        subcommand="eval verify",
        config={
            "model": model,
            "pairs": pairs,
            "equal_sizes": equal_sizes,
            "lipschitz_grid": lipschitz_grid,
            "out": out,
        },
        seed=seed,
        inputs=[model],
    )
    report = verify_properties(
        load_graphon(model),
        pairs,
        generator(seed, STREAM_EVAL),
        equal_sizes=equal_sizes,
        grid_size=lipschitz_grid,
        threads=run.threads,
    )
    emit(report.to_dict(), out, record)


@router.command("graphon")
@handle_errors
def graphon(
    model: Path = typer.Option(..., "--model", help="Graphon model JSON."),
    resolution: int = typer.Option(
        DEFAULT_GRAPHON_RESOLUTION, "--resolution", help="Grid points per axis."
    ),
    out: Path = typer.Option(..., "--out", help="Output JSON."),
):
    """Write f and g sampled on a uniform grid, for plotting."""
    record = RunRecord(
        subcommand="eval graphon",
        config={"model": model, "resolution": resolution, "out": out},
        inputs=[model],
    )
    grid, f_values, g_values = discretize_graphon(load_graphon(model), resolution)
    payload = {"grid": grid.tolist(), "f": f_values.tolist(), "g": g_values.tolist()}
    write_json(payload, out)
    record.finish(out)


@router.command("protocol")
@handle_errors
def protocol(
    ctx: typer.Context,
    trials: int = typer.Option(10, "--trials", help="Ground-truth draws."),
    size: list[int] = typer.Option(
        [10, 50, 100], "--size", help="Training size (repeatable)."
    ),
    method: list[LearnMethod] = typer.Option(
        [LearnMethod.HOT, LearnMethod.RAML], "--method", help="Learner (repeatable)."
    ),
    v_max: int = typer.Option(20, "--vmax", help="Ground-truth V_max."),
    order: int = typer.Option(5, "--order", help="Fourier order S."),
    horizon: float = typer.Option(50.0, "--horizon", help="Observation window."),
    n_train: int = typer.Option(100, "--n-train", help="Training pool size."),
    n_validation: int = typer.Option(10, "--n-validation", help="Validation size."),
    n_test: int = typer.Option(10, "--n-test", help="Test size."),
    epochs: int = typer.Option(20, "--epochs", help="Epochs per run."),
    lr: float = typer.Option(0.01, "--lr", help="Adam learning rate."),
    batch: int = typer.Option(10, "--batch", help="Batch size B."),
    fgw_grid: int = typer.Option(DEFAULT_FGW_GRID, "--fgw-grid", help="FGW grid."),
    seed: int = typer.Option(0, "--seed", help="Root seed."),
    out: Path = typer.Option(..., "--out", help="Per-run CSV."),
    summary: Path | None = typer.Option(None, "--summary", help="Mean table CSV."),
):
    """Run the synthetic recovery protocol."""
    run = options(ctx)
    config = validated(
        ProtocolConfig,
        trials=trials,
        v_max=v_max,
        order=order,
        horizon=horizon,
        n_train=n_train,
        n_validation=n_validation,
        n_test=n_test,
        train_sizes=size,
        methods=method,
        epochs=epochs,
        learning_rate=lr,
        batch_size=batch,
        fgw_grid=fgw_grid,
        seed=seed,
        threads=run.threads,
    )
    record = RunRecord(
        subcommand="eval protocol",
        config={**config.model_dump(mode="json"), "out": out, "summary": summary},
        seed=seed,
    )
    records = run_synthetic_protocol(config, progress=not run.quiet)
    write_report_csv(protocol_frame(records), out)
    if summary is not None:
        write_report_csv(summarize_protocol(records), summary)
    record.finish(out, summary)

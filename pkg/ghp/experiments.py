# ghp/experiments.py
"""The module runs the synthetic recovery protocol.

Every trial draws a ground-truth graphon with standard normal θ, simulates a
corpus from it, and splits the corpus into training, validation and test
sets. Each learner is trained on growing prefixes of the training set and
scored by its model distance to the truth and its transport distance to the
test set.
"""

import logging

import pandas as pd
from tqdm import tqdm

from .evaluation import model_fgw, set_ot_metric
from .graphon import sample_sequences
from .learning import train
from .models import GraphonParams
from .schemas import LearnConfig, ProtocolConfig, ProtocolRecord
from .seeding import STREAM_PROTOCOL, generator

logger = logging.getLogger(__name__)

# Sub-streams of a trial
_TRUTH, _CORPUS, _SCORE = 0, 1, 2


def run_synthetic_protocol(
    config: ProtocolConfig, progress: bool = True
) -> list[ProtocolRecord]:
    """Run every (trial, training size, method) combination.

    Args:
        config (ProtocolConfig): Protocol settings.
        progress (bool): Show a progress bar on stderr.

    Returns:
        list[ProtocolRecord]: One record per combination, in trial, size,
            method order.

    """
    records: list[ProtocolRecord] = []
    total = config.trials * len(config.train_sizes) * len(config.methods)
    bar = tqdm(total=total, desc="protocol", disable=not progress)
    for trial in range(config.trials):
        truth = GraphonParams.random(
            config.order,
            config.v_max,
            generator(config.seed, STREAM_PROTOCOL, trial, _TRUTH),
        )
        count = config.n_train + config.n_validation + config.n_test
        corpus = [
            seq
            for _, seq in sample_sequences(
                truth,
                count,
                config.horizon,
                generator(config.seed, STREAM_PROTOCOL, trial, _CORPUS),
                config.threads,
            )
        ]
        pool = corpus[: config.n_train]
        validation = corpus[config.n_train : config.n_train + config.n_validation]
        test = corpus[config.n_train + config.n_validation :]
        logger.info("Trial %d: %d sequences simulated", trial, len(corpus))

        for size_index, size in enumerate(config.train_sizes):
            for method_index, method in enumerate(config.methods):
                learn_config = LearnConfig(
                    epochs=config.epochs,
                    batch_size=config.batch_size,
                    learning_rate=config.learning_rate,
                    horizon=config.horizon,
                    seed=config.seed,
                    method=method,
                    order=config.order,
                    fgw_grid=config.fgw_grid,
                    threads=config.threads,
                )
                report = train(
                    pool[:size],
                    learn_config,
                    validation=validation or None,
                    progress=False,
                )
                score_rng = generator(
                    config.seed,
                    STREAM_PROTOCOL,
                    trial,
                    _SCORE,
                    size_index,
                    method_index,
                )
                record = ProtocolRecord(
                    trial=trial,
                    method=method,
                    train_size=size,
                    d_fgw=model_fgw(report.params, truth, config.fgw_grid),
                    d_ot=set_ot_metric(
                        report.params,
                        test,
                        len(test),
                        config.horizon,
                        score_rng,
                        threads=config.threads,
                    ),
                )
                logger.info(
                    "trial=%d method=%s size=%d d_fgw=%.6g d_ot=%.6g",
                    trial,
                    method.value,
                    size,
                    record.d_fgw,
                    record.d_ot,
                )
                records.append(record)
                bar.update()
    bar.close()
    return records


def protocol_frame(records: list[ProtocolRecord]) -> pd.DataFrame:
    """Table of protocol records with the method written as its value."""
    frame = pd.DataFrame([record.model_dump(mode="json") for record in records])
    if frame.empty:
        return pd.DataFrame(columns=list(ProtocolRecord.model_fields))
    return frame


def summarize_protocol(records: list[ProtocolRecord]) -> pd.DataFrame:
    """Mean d_fgw and d_ot per (method, train_size)."""
    frame = protocol_frame(records)
    return (
        frame.groupby(["method", "train_size"], as_index=False)[["d_fgw", "d_ot"]]
        .mean()
        .sort_values(["method", "train_size"], ignore_index=True)
    )

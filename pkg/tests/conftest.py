# tests/conftest.py
"""Contains pytest fixtures for setting up the test environment.

It includes fixtures for seeded random streams, small graphon and Hawkes
models, hand-built event sequences, model and corpus files on disk, and a
Typer test runner for the command line.
"""

import logging

import numpy as np
import pytest
from typer.testing import CliRunner

from ghp.graphon import sample_sequences
from ghp.models import EventSequence, GraphonParams, HawkesModel
from ghp.seeding import generator
from ghp.storage import save_graphon, save_sequences


@pytest.fixture(autouse=True)
def package_logger():
    """Hand the package logger back to pytest after every test.

    The command line installs its own stderr handler and stops propagation,
    which would hide records from `caplog` in later tests.
    """
    yield
    logger = logging.getLogger("ghp")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    logger.propagate = True
    logger.setLevel(logging.NOTSET)


@pytest.fixture(autouse=True)
def single_thread(monkeypatch):
    """Keep GHP_THREADS from the developer's shell out of the tests."""
    monkeypatch.delenv("GHP_THREADS", raising=False)


@pytest.fixture(name="rng")
def rng_fixture() -> np.random.Generator:
    """Provide a seeded random generator.

    Returns:
        np.random.Generator: A generator with a fixed seed.

    """
    return generator(12345)


@pytest.fixture(name="params")
def params_fixture() -> GraphonParams:
    """Provide small graphon parameters (S = 1, V_max = 4).

    Returns:
        GraphonParams: Parameters with standard normal θ.

    """
    return GraphonParams.random(order=1, v_max=4, rng=generator(7))


@pytest.fixture(name="hawkes")
def hawkes_fixture() -> HawkesModel:
    """Provide a stationary two-type Hawkes model.

    Returns:
        HawkesModel: μ = (0.5, 0.3) with a mild cross excitation.

    """
    return HawkesModel(
        mu=np.array([0.5, 0.3]),
        adjacency=np.array([[0.2, 0.1], [0.3, 0.1]]),
        kernel_rate=1.0,
    )


def _random_stationary_model(rng: np.random.Generator) -> HawkesModel:
    size = int(rng.integers(1, 4))
    mu = rng.uniform(0.5, 1.5, size)
    adjacency = rng.uniform(0.05, 1.0, (size, size))
    kernel_rate = float(rng.uniform(0.5, 2.0))
    branching = HawkesModel(mu, adjacency, kernel_rate).branching_matrix
    adjacency *= 0.6 / np.linalg.norm(branching, 2)
    return HawkesModel(mu, adjacency, kernel_rate)


@pytest.fixture(name="random_model")
def random_model_fixture():
    """Provide a factory of random stationary models.

    Returns:
        Callable[[np.random.Generator], HawkesModel]: Draws 1 to 3 types with
            base rates in [0.5, 1.5] and a branching matrix of spectral
            norm 0.6.

    """
    return _random_stationary_model


@pytest.fixture(name="sequence")
def sequence_fixture() -> EventSequence:
    """Provide a short two-type sequence on [0, 5].

    Returns:
        EventSequence: Five events.

    """
    return EventSequence.from_events(
        5.0, [(0.4, 0), (1.1, 1), (1.7, 0), (2.9, 0), (4.2, 1)], num_types=2
    )


@pytest.fixture(name="separated_corpus")
def separated_corpus_fixture() -> list[EventSequence]:
    """Provide two sequences whose types fire at well separated times.

    Returns:
        list[EventSequence]: Two sequences on [0, 10].

    """
    first = EventSequence.from_events(
        10.0,
        [(0.1, 0), (0.2, 0), (0.3, 0), (5.0, 1), (6.0, 1), (7.0, 1)],
        num_types=2,
    )
    second = EventSequence.from_events(
        10.0, [(2.0, 0), (3.0, 0), (8.0, 1), (9.0, 1)], num_types=2
    )
    return [first, second]


@pytest.fixture(name="model_file")
def model_file_fixture(tmp_path, params):
    """Write the small graphon to a model file.

    Args:
        tmp_path (Path): Per-test temporary directory.
        params (GraphonParams): The graphon fixture.

    Returns:
        Path: The model JSON file.

    """
    path = tmp_path / "model.json"
    save_graphon(params, path)
    return path


@pytest.fixture(name="corpus_file")
def corpus_file_fixture(tmp_path, params):
    """Write a corpus of six sequences simulated from the small graphon.

    Args:
        tmp_path (Path): Per-test temporary directory.
        params (GraphonParams): The graphon fixture.

    Returns:
        Path: The JSONL corpus file.

    """
    path = tmp_path / "corpus.jsonl"
    corpus = sample_sequences(params, 6, 10.0, generator(99), threads=1)
    save_sequences([seq for _, seq in corpus], path)
    return path


@pytest.fixture(name="runner")
def runner_fixture() -> CliRunner:
    """Provide a Typer test runner for the command line.

    Returns:
        CliRunner: The runner.

    """
    return CliRunner()

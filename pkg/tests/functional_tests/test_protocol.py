# tests/functional_tests/test_protocol.py
"""End-to-end and statistical checks.

These tests are slow and deselected by default; run them with
`pytest -m slow`. They cover the synthetic recovery protocol and its trends
over epochs and training sizes, stationarity of many sampled models, the
guarantee checks on many pairs, and the agreement of both simulators with
the closed-form average intensity.
"""

import numpy as np
import pytest

from ghp.evaluation import verify_properties
from ghp.experiments import protocol_frame, run_synthetic_protocol, summarize_protocol
from ghp.graphon import sample_hp, sample_sequences
from ghp.hawkes import (
    average_intensity,
    is_stationary,
    simulate_branching,
    simulate_ogata,
)
from ghp.learning import train
from ghp.models import GraphonParams, LearnMethod
from ghp.schemas import LearnConfig, ProtocolConfig
from ghp.seeding import generator

pytestmark = pytest.mark.slow


def test_protocol_records_and_summary():
    """Verify one record per (trial, size, method) and the mean table."""
    config = ProtocolConfig(
        trials=2,
        v_max=3,
        order=1,
        horizon=5.0,
        n_train=4,
        n_validation=1,
        n_test=2,
        train_sizes=[2, 4],
        epochs=1,
        batch_size=2,
        fgw_grid=5,
        seed=11,
        threads=1,
    )
    records = run_synthetic_protocol(config, progress=False)
    assert len(records) == 8
    assert [(r.trial, r.train_size, r.method) for r in records[:4]] == [
        (0, 2, LearnMethod.HOT),
        (0, 2, LearnMethod.RAML),
        (0, 4, LearnMethod.HOT),
        (0, 4, LearnMethod.RAML),
    ]
    assert all(np.isfinite(r.d_fgw) and r.d_fgw >= 0 for r in records)
    assert all(r.d_ot >= 0 for r in records)

    frame = protocol_frame(records)
    assert set(frame["method"]) == {"hot", "raml"}
    summary = summarize_protocol(records)
    assert len(summary) == 4
    assert list(summary.columns) == ["method", "train_size", "d_fgw", "d_ot"]

    again = run_synthetic_protocol(config, progress=False)
    assert [r.d_fgw for r in again] == [r.d_fgw for r in records]


def test_training_moves_toward_truth():
    """Verify that both rewards end closer to the ground truth than they start
    and that the transport reward is not worse than the payoff baseline."""
    truth = GraphonParams.random(order=1, v_max=6, rng=generator(41))
    data = [seq for _, seq in sample_sequences(truth, 30, 20.0, generator(42), 1)]
    finals = {}
    for method in (LearnMethod.HOT, LearnMethod.RAML):
        config = LearnConfig(
            epochs=5,
            batch_size=10,
            learning_rate=0.05,
            v_max=6,
            order=1,
            horizon=20.0,
            method=method,
            fgw_grid=20,
            seed=0,
            threads=1,
        )
        report = train(data, config, reference=truth, progress=False)
        distances = [record.d_fgw for record in report.epochs]
        assert distances[-1] < report.initial_d_fgw
        finals[method] = distances[-1]
    assert finals[LearnMethod.HOT] <= 1.1 * finals[LearnMethod.RAML]


def test_protocol_distance_falls_with_training_size():
    """Verify that more training sequences give a model closer to the truth."""
    config = ProtocolConfig(
        trials=1,
        v_max=6,
        order=1,
        horizon=20.0,
        n_train=30,
        n_validation=0,
        n_test=4,
        train_sizes=[10, 30],
        epochs=3,
        learning_rate=0.05,
        batch_size=10,
        fgw_grid=20,
        seed=5,
        threads=1,
    )
    summary = summarize_protocol(run_synthetic_protocol(config, progress=False))
    table = summary.pivot(index="train_size", columns="method", values="d_fgw")
    assert (table.loc[30] < table.loc[10]).all()
    assert table.loc[30, "hot"] <= 1.1 * table.loc[30, "raml"]


@pytest.mark.parametrize("v_max", [5, 20])
def test_thousand_sampled_models_are_stationary(v_max):
    """Verify stationarity of 1000 models drawn from one graphon.

    Args:
        v_max (int): V_max of the graphon.

    """
    params = GraphonParams.random(order=5, v_max=v_max, rng=generator(2024))
    rng = generator(2024, v_max)
    norms = [is_stationary(sample_hp(params, rng)).spectral_norm for _ in range(1000)]
    assert max(norms) < 1.0


@pytest.mark.parametrize("equal_sizes", [False, True])
def test_bounds_hold_on_hundred_pairs(equal_sizes):
    """Verify that no sampled pair violates any bound check.

    Args:
        equal_sizes (bool): Draw both models of a pair with the same size.

    """
    params = GraphonParams.random(order=2, v_max=6, rng=generator(31))
    report = verify_properties(
        params, 100, generator(31, 1), equal_sizes=equal_sizes, grid_size=256
    )
    expected = {
        "stationary_1",
        "stationary_2",
        "mu_lower",
        "mu_upper",
        "A_w",
        "A_gw",
        "intensity",
    }
    if equal_sizes:
        expected.add("intensity_equal_size")
    assert set(report.violation_counts) >= expected
    assert report.total_violations == 0
    assert report.inestimable == 0


@pytest.mark.parametrize("simulate", [simulate_ogata, simulate_branching])
def test_simulators_match_average_intensity(random_model, simulate):
    """Verify that mean event rates are within 5% of (I - A·D)^-1 μ.

    Twenty random models, each simulated 200 times on [0, 500].

    Args:
        random_model (Callable): Factory of random stationary models.
        simulate (Callable): Simulation algorithm under test.

    """
    horizon = 500.0
    for index in range(20):
        model = random_model(generator(77, index))
        counts = np.zeros(model.num_types)
        for run in range(200):
            seq = simulate(model, horizon, generator(78, index, run))
            counts += np.bincount(seq.types, minlength=model.num_types)
        rates = counts / (200 * horizon)
        np.testing.assert_allclose(rates, average_intensity(model), rtol=0.05)

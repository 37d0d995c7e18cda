# tests/unit_tests/test_learning.py
"""Unit tests for the graphon learner.

This module covers the V_max heuristic, the transport-weighted loss and the
exponential-payoff baseline, the chain-rule gradient over θ, the optimizer,
and short end-to-end training runs.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from ghp.errors import ConfigurationError, InputError
from ghp.graphon import model_from_latents
from ghp.hawkes import average_intensity, ll_gradient, log_likelihood, simulate_ogata
from ghp.learning import (
    Adam,
    param_gradient,
    raml_baseline_weights,
    raml_hot_loss,
    train,
    vmax_heuristic,
)
from ghp.models import (
    EventSequence,
    GraphonParams,
    HawkesModel,
    LearnMethod,
    TransportPlan,
)
from ghp.schemas import LearnConfig
from ghp.seeding import generator


def _sequence_with_types(count: int) -> EventSequence:
    """Sequence on [0, 10] with one event of each of `count` types."""
    return EventSequence.from_events(
        10.0, [(1.0 + v, v) for v in range(count)], num_types=max(count, 1)
    )


def _generated(params: GraphonParams, count: int):
    """`count` (model, sequence) pairs simulated from `params`."""
    rng = generator(5)
    pairs = []
    for size in range(1, count + 1):
        model = model_from_latents(params, rng.uniform(0.05, 1.0, size))
        pairs.append((model, simulate_ogata(model, 10.0, rng)))
    return pairs


def _weighted_loss(params, pairs, weights) -> float:
    return -sum(
        weight * log_likelihood(model_from_latents(params, model.latent_x), seq)
        for (model, seq), weight in zip(pairs, weights, strict=True)
    )


# --- V_max heuristic ---


@pytest.mark.parametrize(
    ("counts", "expected"),
    [([3, 3], 6), ([2, 4], 6), ([0, 4], 4), ([0, 0], 1), ([1], 2)],
)
def test_vmax_heuristic(counts, expected):
    """Verify twice the mean number of distinct types, rounded, at least 1.

    Args:
        counts (list[int]): Distinct types of each sequence.
        expected (int): Heuristic value.

    """
    data = [_sequence_with_types(count) for count in counts]
    assert vmax_heuristic(data) == expected


def test_vmax_heuristic_rejects_empty_corpus():
    """Verify that an empty corpus raises InputError."""
    with pytest.raises(InputError):
        vmax_heuristic([])


# --- Losses and rewards ---


def test_raml_hot_loss_weights(params: GraphonParams):
    """Verify the loss for a uniform plan and for a diagonal plan.

    Args:
        params (GraphonParams): Graphon fixture.

    """
    generated = _generated(params, 2)
    real = [seq for _, seq in generated]
    lls = np.array([-3.0, -5.0])

    uniform = TransportPlan.from_matrix(np.full((2, 2), 0.25))
    loss, weights = raml_hot_loss(generated, real, uniform, lls)
    np.testing.assert_allclose(weights, [0.25, 0.25])
    assert loss == pytest.approx(2.0)

    diagonal = TransportPlan.from_matrix(np.eye(2) / 2)
    loss, weights = raml_hot_loss(generated, real, diagonal, lls)
    np.testing.assert_allclose(weights, [0.5, 0.5])
    assert loss == pytest.approx(4.0)


def test_raml_hot_loss_computes_likelihoods(params: GraphonParams):
    """Verify that omitted likelihoods are evaluated from the models.

    Args:
        params (GraphonParams): Graphon fixture.

    """
    generated = _generated(params, 2)
    real = [seq for _, seq in generated]
    plan = TransportPlan.from_matrix(np.array([[0.4, 0.1], [0.1, 0.4]]))
    loss, weights = raml_hot_loss(generated, real, plan)
    expected = -sum(0.4 * log_likelihood(model, seq) for model, seq in generated)
    assert loss == pytest.approx(expected)
    assert np.all((weights >= 0) & (weights <= 0.5))


def test_raml_hot_loss_skips_degenerate_sequences(params: GraphonParams):
    """Verify that -inf likelihoods are left out of the loss.

    Args:
        params (GraphonParams): Graphon fixture.

    """
    generated = _generated(params, 2)
    real = [seq for _, seq in generated]
    plan = TransportPlan.from_matrix(np.eye(2) / 2)
    loss, _ = raml_hot_loss(generated, real, plan, np.array([-np.inf, -2.0]))
    assert loss == pytest.approx(1.0)
    loss, _ = raml_hot_loss(generated, real, plan, np.array([-np.inf, -np.inf]))
    assert loss == np.inf


def test_raml_hot_loss_rejects_shape_mismatch(params: GraphonParams):
    """Verify that a plan of the wrong shape raises InputError.

    Args:
        params (GraphonParams): Graphon fixture.

    """
    generated = _generated(params, 2)
    plan = TransportPlan.from_matrix(np.full((2, 3), 1 / 6))
    with pytest.raises(InputError):
        raml_hot_loss(generated, [generated[0][1]], plan)


def test_raml_baseline_weights():
    """Verify the exponential payoff on a hand-computed example."""
    weights = raml_baseline_weights(np.array([[0.0], [1.0]]), tau=1.0)
    expected = np.array([1.0, np.exp(-1.0)]) / (1.0 + np.exp(-1.0))
    np.testing.assert_allclose(weights, expected)

    even = raml_baseline_weights(np.ones((3, 2)), tau=0.5)
    np.testing.assert_allclose(even, np.full(3, 2 / 3))


def test_raml_baseline_weights_rejects_bad_temperature():
    """Verify that τ ≤ 0 raises ConfigurationError."""
    with pytest.raises(ConfigurationError):
        raml_baseline_weights(np.ones((2, 2)), tau=0.0)


# --- Gradients ---


@pytest.mark.parametrize("instance", range(20))
def test_param_gradient_matches_finite_differences(instance):
    """Verify the chain-rule gradient over θ against central differences.

    Args:
        instance (int): Seed of the random θ.

    """
    params = GraphonParams.random(order=1, v_max=4, rng=generator(8, instance))
    pairs = _generated(params, 3)
    weights = np.array([0.5, 0.2, 0.3])
    grads = [ll_gradient(model, seq) for model, seq in pairs]
    analytic = param_gradient(params, [model for model, _ in pairs], grads, weights)

    theta = params.to_vector()
    step = 1e-6
    numeric = np.zeros_like(theta)
    for index in range(theta.size):
        offset = np.zeros_like(theta)
        offset[index] = step
        upper = _weighted_loss(params.with_vector(theta + offset), pairs, weights)
        lower = _weighted_loss(params.with_vector(theta - offset), pairs, weights)
        numeric[index] = (upper - lower) / (2 * step)

    scale = np.abs(numeric).max()
    np.testing.assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-6 * scale)


def test_param_gradient_vanishes_through_flat_g(params: GraphonParams):
    """Verify that at zero Fourier coefficients the g part of the gradient is 0.

    Args:
        params (GraphonParams): Graphon fixture.

    """
    flat = GraphonParams(
        f1=params.f1, f2=params.f2, g_coeffs=np.zeros((2, 2, 4)), v_max=4
    )
    pairs = _generated(flat, 2)
    grads = [ll_gradient(model, seq) for model, seq in pairs]
    gradient = param_gradient(flat, [model for model, _ in pairs], grads, [0.5, 0.5])
    np.testing.assert_array_equal(gradient[2:], 0.0)
    assert np.any(gradient[:2] != 0.0)


def test_param_gradient_with_zero_weights(params: GraphonParams):
    """Verify that zero weights give a zero gradient.

    Args:
        params (GraphonParams): Graphon fixture.

    """
    pairs = _generated(params, 2)
    grads = [ll_gradient(model, seq) for model, seq in pairs]
    gradient = param_gradient(params, [model for model, _ in pairs], grads, [0, 0])
    np.testing.assert_array_equal(gradient, np.zeros(params.num_parameters))


def test_param_gradient_rejects_models_without_latents(params: GraphonParams, hawkes):
    """Verify that a model without latent coordinates raises InputError.

    Args:
        params (GraphonParams): Graphon fixture.
        hawkes (HawkesModel): Model fixture without latent coordinates.

    """
    grads = [(np.zeros(2), np.zeros((2, 2)))]
    with pytest.raises(InputError):
        param_gradient(params, [hawkes], grads, [1.0])
    with pytest.raises(InputError):
        param_gradient(params, [hawkes], grads, [1.0, 0.0])


# --- Optimizer ---


def test_adam_first_step_moves_by_learning_rate():
    """Verify that the first bias-corrected step has size lr per coordinate."""
    optimizer = Adam(lr=0.1)
    theta = np.array([1.0, -2.0, 0.5])
    updated = optimizer.step(theta, np.array([3.0, -0.2, 0.0]))
    np.testing.assert_allclose(updated, [0.9, -1.9, 0.5], atol=1e-6)


def test_adam_descends_a_quadratic():
    """Verify that repeated steps approach the minimum of ‖θ - c‖²."""
    optimizer = Adam(lr=0.05)
    target = np.array([1.0, -1.0])
    theta = np.zeros(2)
    for _ in range(500):
        theta = optimizer.step(theta, 2.0 * (theta - target))
    np.testing.assert_allclose(theta, target, atol=1e-2)


# --- Training ---


def _tiny_config(**overrides) -> LearnConfig:
    settings = {
        "epochs": 1,
        "batch_size": 1,
        "learning_rate": 0.01,
        "order": 1,
        "v_max": 2,
        "horizon": 5.0,
        "seed": 3,
        "fgw_grid": 4,
        "threads": 1,
    }
    settings.update(overrides)
    return LearnConfig(**settings)


def test_train_smallest_run(sequence: EventSequence):
    """Verify that one epoch on one sequence produces one finite record.

    Args:
        sequence (EventSequence): Sequence fixture.

    """
    report = train([sequence], _tiny_config(), progress=False)
    assert len(report.epochs) == 1
    record = report.epochs[0]
    assert np.isfinite(record.loss)
    assert record.d_fgw is None
    assert report.v_max == 2
    assert report.params.order == 1
    frame = report.to_frame()
    assert list(frame.columns) == ["epoch", "loss", "mean_reward", "d_fgw", "seconds"]


def test_train_is_deterministic(separated_corpus):
    """Verify that one seed reproduces parameters and losses.

    Args:
        separated_corpus (list[EventSequence]): Two sequences on [0, 10].

    """
    config = _tiny_config(epochs=2, v_max="auto", horizon=None)
    first = train(separated_corpus, config, progress=False)
    second = train(separated_corpus, config, progress=False)
    assert first.params == second.params
    assert [r.loss for r in first.epochs] == [r.loss for r in second.epochs]
    assert first.v_max == 4
    assert first.horizon == 10.0


def test_train_tracks_reference_and_validation(separated_corpus, params):
    """Verify per-epoch d_fgw and val_d_ot when a reference and validation
    set are given.

    Args:
        separated_corpus (list[EventSequence]): Two sequences on [0, 10].
        params (GraphonParams): Reference graphon.

    """
    config = _tiny_config(epochs=2, method=LearnMethod.RAML)
    report = train(
        separated_corpus[:1],
        config,
        reference=params,
        validation=separated_corpus[1:],
        progress=False,
    )
    assert all(record.d_fgw is not None for record in report.epochs)
    assert all(record.val_d_ot is not None for record in report.epochs)
    assert "val_d_ot" in report.to_frame().columns


def test_train_rejects_empty_corpus():
    """Verify that an empty corpus raises InputError."""
    with pytest.raises(InputError):
        train([], _tiny_config(), progress=False)


def test_learn_config_rejects_zero_epochs():
    """Verify that zero epochs fail validation."""
    with pytest.raises(ValidationError):
        LearnConfig(epochs=0)
    with pytest.raises(ValidationError):
        LearnConfig(v_max="many")
    assert LearnConfig(v_max="7").v_max == 7


def test_train_records_initial_distance(separated_corpus, params):
    """Verify that the distance of the starting point to the reference is kept.

    Args:
        separated_corpus (list[EventSequence]): Two sequences on [0, 10].
        params (GraphonParams): Reference graphon.

    """
    report = train(separated_corpus, _tiny_config(), reference=params, progress=False)
    assert report.initial_d_fgw is not None
    assert report.initial_d_fgw >= 0.0
    unreferenced = train(separated_corpus, _tiny_config(), progress=False)
    assert unreferenced.initial_d_fgw is None


def test_train_with_frozen_g_fits_f_only(separated_corpus):
    """Verify that with learn_g off the g coefficients stay at zero.

    Args:
        separated_corpus (list[EventSequence]): Two sequences on [0, 10].

    """
    report = train(
        separated_corpus, _tiny_config(epochs=2, learn_g=False), progress=False
    )
    np.testing.assert_array_equal(report.params.g_coeffs, 0.0)
    assert np.isfinite([report.params.f1, report.params.f2]).all()
    learned = train(separated_corpus, _tiny_config(epochs=2), progress=False)
    assert np.any(learned.params.g_coeffs != 0.0)


def _rate_gap(params: GraphonParams, empirical_rate: float) -> float:
    """|mean over x of the one-type average intensity - empirical rate|."""
    grid = np.linspace(0.0, 1.0, 21)
    rates = [
        average_intensity(model_from_latents(params, np.array([x])))[0] for x in grid
    ]
    return abs(float(np.mean(rates)) - empirical_rate)


def test_frozen_g_learns_poisson_rate():
    """Verify that fitting f alone on Poisson data moves the model rate toward
    the empirical rate as epochs accumulate."""
    poisson = HawkesModel(mu=[3.0], adjacency=[[0.0]])
    rng = generator(9)
    data = [simulate_ogata(poisson, 20.0, rng) for _ in range(20)]
    empirical_rate = sum(len(seq) for seq in data) / (20 * 20.0)
    gaps = []
    for epochs in (1, 5):
        config = _tiny_config(
            epochs=epochs,
            batch_size=5,
            learning_rate=0.1,
            order=0,
            v_max=1,
            horizon=20.0,
            learn_g=False,
        )
        report = train(data, config, progress=False)
        gaps.append(_rate_gap(report.params, empirical_rate))
    assert gaps[1] < gaps[0]

# tests/unit_tests/test_evaluation.py
"""Unit tests for model evaluation and guarantee checks.

This module covers graphon discretization, the model-level fused
Gromov-Wasserstein distance, the corpus transport metric, latent type
alignment, aligned test likelihoods, and the bound checks on sampled model
pairs.
"""

import numpy as np
import pytest

from ghp.errors import ConfigurationError, InputError
from ghp.evaluation import (
    BoundCheck,
    align_types,
    aligned_coordinates,
    check_pair,
    discretize_graphon,
    match_generated,
    model_fgw,
    set_ot_metric,
    test_nll,
    verify_properties,
)
from ghp.graphon import estimate_lipschitz, eval_f, model_from_latents
from ghp.hawkes import log_likelihood
from ghp.models import EventSequence, GraphonParams, TransportPlan
from ghp.seeding import generator
from ghp.transport import inner_ot

BOUND_NAMES = (
    "stationary_1",
    "stationary_2",
    "mu_lower",
    "mu_upper",
    "A_w",
    "A_gw",
    "intensity",
    "intensity_equal_size",
)


def _single_pair_alignment(latents, inner_matrix, grid_n=1001, bandwidth=0.1):
    """Alignment of one generated and one real sequence with a fixed plan."""
    inner = TransportPlan.from_matrix(np.asarray(inner_matrix, dtype=float))
    outer = TransportPlan.from_matrix(np.ones((1, 1)))
    return align_types(
        outer, [[inner]], [np.asarray(latents)], bandwidth=bandwidth, grid_n=grid_n
    )


# --- Model-level distances ---


def test_discretize_graphon_shapes(params: GraphonParams):
    """Verify the grid and the shapes of f and g.

    Args:
        params (GraphonParams): Graphon fixture.

    """
    grid, f_values, g_values = discretize_graphon(params, resolution=25)
    assert grid[0] == 0.0 and grid[-1] == 1.0
    assert f_values.shape == (25,)
    assert g_values.shape == (25, 25)
    with pytest.raises(ConfigurationError):
        discretize_graphon(params, resolution=1)


def test_model_fgw_to_itself(params: GraphonParams):
    """Verify that a graphon is (almost) at zero distance from itself.

    Args:
        params (GraphonParams): Graphon fixture.

    """
    assert model_fgw(params, params, grid_n=10) < 1e-3


def test_model_fgw_separates_different_graphons(params: GraphonParams):
    """Verify that graphons with different base rates are apart.

    Args:
        params (GraphonParams): Graphon fixture.

    """
    louder = GraphonParams(
        f1=params.f1 + 3.0,
        f2=params.f2,
        g_coeffs=params.g_coeffs,
        v_max=params.v_max,
    )
    assert model_fgw(params, louder, grid_n=10) > model_fgw(params, params, grid_n=10)
    with pytest.raises(ConfigurationError):
        model_fgw(params, louder, grid_n=1)


# --- Sequence-level distances ---


def test_set_ot_metric_single_pair(params: GraphonParams, sequence: EventSequence):
    """Verify that one generated and one test sequence reduce to the inner
    transport between them.

    Args:
        params (GraphonParams): Graphon fixture.
        sequence (EventSequence): Test sequence fixture.

    """
    generated, result = match_generated(params, [sequence], 1, 5.0, generator(1))
    expected, _ = inner_ot(generated[0][1], sequence)
    assert result.distance == pytest.approx(expected)
    again = set_ot_metric(params, [sequence], 1, 5.0, generator(1))
    assert again == pytest.approx(result.distance)


def test_set_ot_metric_rejects_bad_inputs(params: GraphonParams, sequence):
    """Verify the errors for an empty test set and a zero generated count.

    Args:
        params (GraphonParams): Graphon fixture.
        sequence (EventSequence): Test sequence fixture.

    """
    with pytest.raises(InputError):
        set_ot_metric(params, [], 1, 5.0, generator(1))
    with pytest.raises(ConfigurationError):
        set_ot_metric(params, [sequence], 0, 5.0, generator(1))


# --- Alignment ---


def test_align_single_landmark():
    """Verify that one landmark puts the argmax on its coordinate and the
    density integrates to one."""
    (result,) = _single_pair_alignment([0.5], [[1.0]])
    assert result.aligned
    assert result.x_star == pytest.approx(0.5)
    step = 1.0 / 1000
    assert result.density.sum() * step == pytest.approx(1.0, abs=1e-6)
    assert result.landmarks == 1


def test_align_tie_takes_lowest_coordinate():
    """Verify that two equal, well separated modes resolve to the lower one."""
    (result,) = _single_pair_alignment(
        [0.2, 0.8], [[0.5], [0.5]], grid_n=1000, bandwidth=0.01
    )
    assert result.x_star < 0.5
    assert abs(result.x_star - 0.2) < 1e-3


def test_align_leaves_massless_type_unaligned():
    """Verify that a real type without transport mass stays unaligned."""
    results = _single_pair_alignment([0.3], [[1.0, 0.0]])
    assert [item.type for item in results] == [0, 1]
    assert results[0].aligned
    assert not results[1].aligned
    assert results[1].x_star is None
    assert results[1].to_record().x_star is None
    coords = aligned_coordinates(results, 2)
    assert coords[0] == pytest.approx(0.3, abs=1e-3)
    assert coords[1] == 0.5


def test_align_pooled_over_sequences():
    """Verify that pooled results carry no sequence index."""
    inner = TransportPlan.from_matrix(np.array([[0.5, 0.0], [0.0, 0.5]]))
    outer = TransportPlan.from_matrix(np.array([[0.5, 0.0], [0.0, 0.5]]))
    results = align_types(
        outer,
        [[inner, inner], [inner, inner]],
        [np.array([0.1, 0.9]), np.array([0.2, 0.8])],
        grid_n=101,
        all_pairs=True,
    )
    assert [item.sequence for item in results] == [None, None]
    assert results[0].x_star < results[1].x_star


def test_align_rejects_mismatched_inputs():
    """Verify the shape and parameter checks."""
    inner = TransportPlan.from_matrix(np.array([[1.0]]))
    outer = TransportPlan.from_matrix(np.ones((1, 1)))
    with pytest.raises(InputError):
        align_types(outer, [[inner]], [np.array([0.1, 0.2])])
    with pytest.raises(InputError):
        align_types(outer, [[inner]], [])
    with pytest.raises(ConfigurationError):
        align_types(outer, [[inner]], [np.array([0.1])], bandwidth=0.0)


# --- Test likelihood ---


def test_nll_of_empty_sequence(params: GraphonParams):
    """Verify that an empty sequence scores Σ_v f(x_v)·T.

    Args:
        params (GraphonParams): Graphon fixture.

    """
    seq = EventSequence.from_events(4.0, [], num_types=2)
    coords = np.array([0.3, 0.6])
    expected = eval_f(params, coords).sum() * 4.0
    assert test_nll(params, seq, coords) == pytest.approx(expected)


def test_nll_matches_model_likelihood(params: GraphonParams, sequence):
    """Verify that the score is the negative likelihood at the coordinates.

    Args:
        params (GraphonParams): Graphon fixture.
        sequence (EventSequence): Test sequence fixture.

    """
    coords = np.array([0.4, 0.7])
    expected = -log_likelihood(model_from_latents(params, coords), sequence)
    assert test_nll(params, sequence, coords) == pytest.approx(expected)


def test_nll_degenerate_and_mismatched(params: GraphonParams, sequence):
    """Verify +inf at a zero base rate and the size check.

    Args:
        params (GraphonParams): Graphon fixture.
        sequence (EventSequence): Test sequence fixture (type 0 fires first).

    """
    assert test_nll(params, sequence, np.array([0.0, 0.5])) == np.inf
    with pytest.raises(InputError):
        test_nll(params, sequence, np.array([0.5]))


# --- Guarantees ---


def test_bound_check_slack():
    """Verify the relative slack and the strict variant."""
    assert BoundCheck("loose", 1.0 + 5e-7, 1.0).holds
    assert not BoundCheck("loose", 1.0 + 1e-5, 1.0).holds
    assert not BoundCheck("strict", 1.0, 1.0, strict=True).holds
    assert BoundCheck("strict", 0.99, 1.0, strict=True).holds


def test_check_pair_identical_models(params: GraphonParams):
    """Verify that a model compared with itself violates nothing.

    Args:
        params (GraphonParams): Graphon fixture.

    """
    latent = np.array([0.15, 0.5, 0.85])
    model = model_from_latents(params, latent)
    outcome = check_pair(model, model, estimate_lipschitz(params, 64), params.v_max)
    assert outcome.violations == []
    assert outcome.inestimable == []
    names = [check.name for check in outcome.checks]
    assert "intensity" in names and "intensity_equal_size" in names
    for check in outcome.checks:
        if not check.name.startswith("stationary"):
            assert check.lhs == pytest.approx(0.0, abs=1e-12)


def test_check_pair_orders_models_by_size(params: GraphonParams, hawkes):
    """Verify that the smaller model plays the first role.

    Args:
        params (GraphonParams): Graphon fixture.
        hawkes (HawkesModel): Model without latent coordinates.

    """
    small = model_from_latents(params, np.array([0.4]))
    large = model_from_latents(params, np.array([0.1, 0.6, 0.9]))
    outcome = check_pair(large, small, estimate_lipschitz(params, 64), params.v_max)
    assert outcome.sizes == (1, 3)
    with pytest.raises(InputError):
        check_pair(hawkes, small, estimate_lipschitz(params, 64))


def test_verify_properties_holds_every_bound(params: GraphonParams):
    """Verify that no sampled pair violates any of the eight bound checks.

    Equal-size pairs are drawn as well, since only they carry the
    equal-size intensity bound.

    Args:
        params (GraphonParams): Graphon fixture.

    """
    report = verify_properties(params, 10, generator(21), grid_size=256, threads=1)
    equal = verify_properties(
        params, 10, generator(23), equal_sizes=True, grid_size=256, threads=1
    )
    names = set(report.violation_counts) | set(equal.violation_counts)
    assert names == set(BOUND_NAMES)
    assert report.total_violations == equal.total_violations == 0
    assert report.inestimable == equal.inestimable == 0
    summary = report.to_dict()
    assert summary["pairs"] == 10
    assert len(summary["checks"]) == 10


def test_verify_properties_equal_sizes(params: GraphonParams):
    """Verify that equal-size pairs are drawn on request.

    Args:
        params (GraphonParams): Graphon fixture.

    """
    report = verify_properties(
        params, 5, generator(22), equal_sizes=True, grid_size=64, threads=1
    )
    assert all(pair.sizes[0] == pair.sizes[1] for pair in report.pairs)
    with pytest.raises(ConfigurationError):
        verify_properties(params, 0, generator(22))

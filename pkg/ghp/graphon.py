# ghp/graphon.py
"""The module implements the parametric graphon (f, g) and the sampling of
finite Hawkes processes from it.

f maps a latent coordinate to a base rate,
    f(x) = softplus(f1) * (exp(sigmoid(f2) * x) - 1),
and g maps a pair of coordinates to an impact level in (0, 1) through a
sigmoid of a two-dimensional Fourier sum of order S. A finite model with V
types is drawn by placing V uniform coordinates in [0, 1] and reading
μ_v = f(x_v) and a_vu = g(x_v, x_u) / (V_max * D).
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .config import DEFAULT_LIPSCHITZ_GRID
from .errors import ConfigurationError, DomainError
from .hawkes import simulate_branching, simulate_ogata
from .models import (
    EventSequence,
    GraphonParams,
    HawkesModel,
    LipschitzEstimate,
    Simulator,
)
from .seeding import parallel_map, spawn

logger = logging.getLogger(__name__)


def softplus(values):
    return np.logaddexp(0.0, values)


def _unit_coordinates(values, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(array)) or np.any((array < 0.0) | (array > 1.0)):
        raise DomainError(f"{name} must lie in [0, 1]")
    return array


# --- Fourier features ---


@dataclass(frozen=True)
class FourierFeatures:
    """Intermediate terms of g on a rectangular set of coordinates.

    For row coordinates x and column coordinates y,
    left[v, i, j] = g1_ij sin(iπx_v) + g2_ij cos(iπx_v) and
    right[w, i, j] = g3_ij sin(jπy_w) + g4_ij cos(jπy_w); the logit of
    g(x_v, y_w) is the sum over (i, j) of their product.
    """

    sin_x: np.ndarray
    cos_x: np.ndarray
    sin_y: np.ndarray
    cos_y: np.ndarray
    left: np.ndarray
    right: np.ndarray
    logits: np.ndarray


def _basis(coords: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    phases = np.outer(coords, np.pi * np.arange(order + 1))
    return np.sin(phases), np.cos(phases)


def _row_terms(coeffs, sin_x, cos_x):
    return sin_x[:, :, None] * coeffs[None, :, :, 0] + cos_x[:, :, None] * coeffs[
        None, :, :, 1
    ]


def _col_terms(coeffs, sin_y, cos_y):
    return sin_y[:, None, :] * coeffs[None, :, :, 2] + cos_y[:, None, :] * coeffs[
        None, :, :, 3
    ]


def fourier_features(
    params: GraphonParams, xs: np.ndarray, ys: np.ndarray | None = None
) -> FourierFeatures:
    """Compute the Fourier terms of g on the grid xs × ys.

    Args:
        params (GraphonParams): Graphon parameters.
        xs (np.ndarray): Row coordinates in [0, 1].
        ys (np.ndarray | None): Column coordinates; defaults to `xs`.

    Returns:
        FourierFeatures: Basis values, partial sums and logits.

    """
    xs = _unit_coordinates(np.atleast_1d(xs), "x")
    ys = xs if ys is None else _unit_coordinates(np.atleast_1d(ys), "y")
    sin_x, cos_x = _basis(xs, params.order)
    sin_y, cos_y = _basis(ys, params.order)
    left = _row_terms(params.g_coeffs, sin_x, cos_x)
    right = _col_terms(params.g_coeffs, sin_y, cos_y)
    logits = np.einsum("vij,wij->vw", left, right)
    return FourierFeatures(sin_x, cos_x, sin_y, cos_y, left, right, logits)


# --- Graphon evaluation ---


def eval_f(params: GraphonParams, x):
    """Evaluate the base-rate function f.

    Args:
        params (GraphonParams): Graphon parameters.
        x (float | np.ndarray): Coordinate(s) in [0, 1].

    Returns:
        float | np.ndarray: Nonnegative rates, same shape as `x`.

    Raises:
        DomainError: If any coordinate falls outside [0, 1].

    """
    coords = _unit_coordinates(x, "x")
    values = softplus(params.f1) * np.expm1(expit(params.f2) * coords)
    return float(values) if values.ndim == 0 else values


def eval_g(params: GraphonParams, x, y):
    """Evaluate g pointwise on broadcast coordinates.

    Args:
        params (GraphonParams): Graphon parameters.
        x (float | np.ndarray): First coordinate(s) in [0, 1].
        y (float | np.ndarray): Second coordinate(s) in [0, 1].

    Returns:
        float | np.ndarray: Values in (0, 1), broadcast shape of `x`, `y`.

    Raises:
        DomainError: If any coordinate falls outside [0, 1].

    """
    xs, ys = np.broadcast_arrays(
        _unit_coordinates(x, "x"), _unit_coordinates(y, "y")
    )
    shape = xs.shape
    left = _row_terms(params.g_coeffs, *_basis(xs.ravel(), params.order))
    right = _col_terms(params.g_coeffs, *_basis(ys.ravel(), params.order))
    values = expit(np.einsum("nij,nij->n", left, right)).reshape(shape)
    return float(values) if values.ndim == 0 else values


def g_matrix(
    params: GraphonParams, xs: np.ndarray, ys: np.ndarray | None = None
) -> np.ndarray:
    """Evaluate g on the grid xs × ys (ys defaults to xs)."""
    return expit(fourier_features(params, xs, ys).logits)


# --- Sampling ---


def model_from_latents(params: GraphonParams, latent_x: np.ndarray) -> HawkesModel:
    """Build the Hawkes model whose types sit at the given coordinates.

    Args:
        params (GraphonParams): Graphon parameters.
        latent_x (np.ndarray): One coordinate in [0, 1] per event type.

    Returns:
        HawkesModel: μ_v = f(x_v), a_vu = g(x_v, x_u) / (V_max * D).

    """
    latent_x = _unit_coordinates(np.atleast_1d(latent_x), "latent_x")
    mu = eval_f(params, latent_x)
    adjacency = g_matrix(params, latent_x) / (params.v_max * params.decay_mass)
    return HawkesModel(
        mu=mu,
        adjacency=adjacency,
        kernel_rate=params.kernel_rate,
        latent_x=latent_x,
    )


def sample_hp(
    params: GraphonParams,
    rng: np.random.Generator,
    forced_V: int | None = None,
) -> HawkesModel:
    """Draw a finite Hawkes model from the graphon.

    The number of types is uniform on {1, ..., V_max} unless `forced_V` is
    given; latent coordinates are i.i.d. uniform on [0, 1].

    Args:
        params (GraphonParams): Graphon parameters.
        rng (np.random.Generator): Random source.
        forced_V (int | None): Fixed number of types.

    Returns:
        HawkesModel: The sampled model with its latent coordinates.

    Raises:
        ConfigurationError: If `forced_V` is outside [1, V_max].

    """
    if forced_V is not None:
        if not 1 <= forced_V <= params.v_max:
            raise ConfigurationError(
                f"forced_V must lie in [1, {params.v_max}], got {forced_V}"
            )
        size = int(forced_V)
    else:
        size = int(rng.integers(1, params.v_max + 1))
    return model_from_latents(params, rng.uniform(0.0, 1.0, size))


def sample_sequences(
    params: GraphonParams,
    count: int,
    horizon: float,
    rng: np.random.Generator,
    threads: int | None = None,
    simulator: Simulator = Simulator.OGATA,
) -> list[tuple[HawkesModel, EventSequence]]:
    """Sample `count` models and simulate one sequence from each.

    Every item draws from its own child stream of `rng`, so the corpus does
    not depend on the thread count.
    """
    if count < 1:
        raise ConfigurationError(f"count must be at least 1, got {count}")
    simulate = (
        simulate_branching if simulator == Simulator.BRANCHING else simulate_ogata
    )

    def draw(stream: np.random.Generator) -> tuple[HawkesModel, EventSequence]:
        model = sample_hp(params, stream)
        return model, simulate(model, horizon, stream)

    return parallel_map(draw, spawn(rng, count), threads)


# --- Regularity estimates ---


def estimate_lipschitz(
    params: GraphonParams, grid_size: int = DEFAULT_LIPSCHITZ_GRID
) -> LipschitzEstimate:
    """Estimate the bi-Lipschitz constants of f and the Lipschitz constant of g.

    c1_f and c2_f are the smallest and largest secant slopes of f over all
    grid pairs; c_g is the largest finite-difference gradient norm of g over
    the grid square.

    Args:
        params (GraphonParams): Graphon parameters.
        grid_size (int): Number of uniform grid points on [0, 1].

    Returns:
        LipschitzEstimate: The grid estimates.

    Raises:
        ConfigurationError: If `grid_size` < 2.

    """
    if grid_size < 2:
        raise ConfigurationError(f"grid_size must be at least 2, got {grid_size}")
    grid = np.linspace(0.0, 1.0, grid_size)
    values = eval_f(params, grid)
    first, second = np.triu_indices(grid_size, k=1)
    slopes = np.abs(values[second] - values[first]) / (grid[second] - grid[first])

    step = grid[1] - grid[0]
    surface = g_matrix(params, grid)
    d_x = np.diff(surface, axis=0)[:, :-1] / step
    d_y = np.diff(surface, axis=1)[:-1, :] / step
    c_g = float(np.sqrt(d_x**2 + d_y**2).max())

    estimate = LipschitzEstimate(
        c1_f=float(slopes.min()),
        c2_f=float(slopes.max()),
        c_g=max(c_g, float(np.finfo(float).eps)),
        grid_size=grid_size,
    )
    logger.debug("Lipschitz estimate %s", estimate)
    return estimate

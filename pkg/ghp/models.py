# ghp/models.py
"""The module defines the domain types shared by every part of the library.

It includes the graphon parameters, finite Hawkes models, event sequences,
transport plans and cost matrices, along with the enums used by the learner
and the command line. All types are immutable snapshots: array fields are
copied on construction and marked read-only, so values can be shared across
worker threads.
"""

import enum
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, InputError

# --- Enums ---


class LearnMethod(str, enum.Enum):
    """Define the reward used to weight generated sequences.

    Attributes:
        HOT (str): Row maxima of the hierarchical OT plan.
        RAML (str): Sum of exponential-payoff conditionals.

    """

    HOT = "hot"
    RAML = "raml"


class Simulator(str, enum.Enum):
    """Define the algorithm used to simulate a finite Hawkes process.

    Attributes:
        OGATA (str): Thinning against the running total intensity.
        BRANCHING (str): Generation-by-generation cluster expansion.

    """

    OGATA = "ogata"
    BRANCHING = "branching"


def _frozen(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


# --- Graphon ---


@dataclass(frozen=True, eq=False)
class GraphonParams:
    """Parameters θ of the graphon pair (f, g) plus sampling settings.

    Attributes:
        f1 (float): Pre-softplus scale of f.
        f2 (float): Pre-sigmoid exponent of f.
        g_coeffs (np.ndarray): Fourier coefficients of g, shape (S+1, S+1, 4)
            indexed (i, j, m).
        v_max (int): Largest number of event types a sampled model may have.
        kernel_rate (float): Decay rate ω of η(t) = exp(-ωt).

    """

    f1: float
    f2: float
    g_coeffs: np.ndarray
    v_max: int
    kernel_rate: float = 1.0

    def __post_init__(self):
        coeffs = _frozen(self.g_coeffs)
        square = coeffs.ndim == 3 and coeffs.shape[0] == coeffs.shape[1]
        if not square or coeffs.shape[2] != 4:
            raise ConfigurationError(
                f"g_coeffs must have shape (S+1, S+1, 4), got {coeffs.shape}"
            )
        if int(self.v_max) < 1:
            raise ConfigurationError(f"v_max must be at least 1, got {self.v_max}")
        if not self.kernel_rate > 0:
            raise ConfigurationError(
                f"kernel_rate must be positive, got {self.kernel_rate}"
            )
        object.__setattr__(self, "g_coeffs", coeffs)
        object.__setattr__(self, "f1", float(self.f1))
        object.__setattr__(self, "f2", float(self.f2))
        object.__setattr__(self, "v_max", int(self.v_max))
        object.__setattr__(self, "kernel_rate", float(self.kernel_rate))

    @property
    def order(self) -> int:
        """Fourier order S."""
        return self.g_coeffs.shape[0] - 1

    @property
    def decay_mass(self) -> float:
        """Kernel mass D = 1/ω."""
        return 1.0 / self.kernel_rate

    @property
    def num_parameters(self) -> int:
        return 2 + self.g_coeffs.size

    def to_vector(self) -> np.ndarray:
        """Flatten θ as [f1, f2, g_coeffs in (i, j, m) row-major order]."""
        return np.concatenate([[self.f1, self.f2], self.g_coeffs.ravel()])

    def with_vector(self, theta: np.ndarray) -> "GraphonParams":
        """Return a copy whose θ is replaced by `theta` (layout of `to_vector`)."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.num_parameters,):
            raise InputError(
                f"theta must have length {self.num_parameters}, got {theta.shape}"
            )
        return GraphonParams(
            f1=theta[0],
            f2=theta[1],
            g_coeffs=theta[2:].reshape(self.g_coeffs.shape),
            v_max=self.v_max,
            kernel_rate=self.kernel_rate,
        )

    @classmethod
    def random(
        cls,
        order: int,
        v_max: int,
        rng: np.random.Generator,
        kernel_rate: float = 1.0,
    ) -> "GraphonParams":
        """Draw every θ entry i.i.d. standard normal."""
        if order < 0:
            raise ConfigurationError(f"Fourier order must be nonnegative, got {order}")
        theta = rng.standard_normal(2 + 4 * (order + 1) ** 2)
        return cls(
            f1=theta[0],
            f2=theta[1],
            g_coeffs=theta[2:].reshape(order + 1, order + 1, 4),
            v_max=v_max,
            kernel_rate=kernel_rate,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphonParams):
            return NotImplemented
        return (
            self.f1 == other.f1
            and self.f2 == other.f2
            and self.v_max == other.v_max
            and self.kernel_rate == other.kernel_rate
            and np.array_equal(self.g_coeffs, other.g_coeffs)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"<GraphonParams(S={self.order}, v_max={self.v_max}, "
            f"kernel_rate={self.kernel_rate}, f1={self.f1:.4g}, f2={self.f2:.4g})>"
        )


@dataclass(frozen=True)
class LipschitzEstimate:
    """Grid estimates of the constants in the regularity assumptions on f, g.

    Attributes:
        c1_f (float): Lower bi-Lipschitz constant of f.
        c2_f (float): Upper bi-Lipschitz constant of f.
        c_g (float): Lipschitz constant of g.
        grid_size (int): Grid resolution used.

    """

    c1_f: float
    c2_f: float
    c_g: float
    grid_size: int


# --- Hawkes ---


@dataclass(frozen=True, eq=False)
class HawkesModel:
    """A finite multivariate Hawkes process with exponential kernel.

    `adjacency[v, u]` is the impact of a type-u event on type v.

    Attributes:
        mu (np.ndarray): Base rates, shape (V,).
        adjacency (np.ndarray): Impact coefficients, shape (V, V).
        kernel_rate (float): Decay rate ω.
        latent_x (np.ndarray | None): Latent coordinates when sampled from a
            graphon.

    """

    mu: np.ndarray
    adjacency: np.ndarray
    kernel_rate: float = 1.0
    latent_x: np.ndarray | None = None

    def __post_init__(self):
        mu = _frozen(self.mu)
        adjacency = _frozen(self.adjacency)
        if mu.ndim != 1 or adjacency.shape != (mu.size, mu.size):
            raise InputError(
                f"mu of shape {mu.shape} and adjacency of shape "
                f"{adjacency.shape} do not describe a square model"
            )
        if np.any(mu < 0) or np.any(adjacency < 0):
            raise InputError("base rates and impact coefficients must be nonnegative")
        if not self.kernel_rate > 0:
            raise ConfigurationError(
                f"kernel_rate must be positive, got {self.kernel_rate}"
            )
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "adjacency", adjacency)
        object.__setattr__(self, "kernel_rate", float(self.kernel_rate))
        if self.latent_x is not None:
            latent = _frozen(self.latent_x)
            if latent.shape != mu.shape:
                raise InputError("latent_x must have one coordinate per type")
            object.__setattr__(self, "latent_x", latent)

    @property
    def num_types(self) -> int:
        return self.mu.size

    @property
    def decay_mass(self) -> float:
        return 1.0 / self.kernel_rate

    @property
    def branching_matrix(self) -> np.ndarray:
        """Φ = D·A."""
        return self.decay_mass * self.adjacency

    def __repr__(self):
        return f"<HawkesModel(V={self.num_types}, kernel_rate={self.kernel_rate})>"


@dataclass(frozen=True, eq=False)
class EventSequence:
    """Events (t_i, v_i) observed on [0, horizon], sorted by time.

    Attributes:
        horizon (float): Observation window length T.
        times (np.ndarray): Event times, nondecreasing.
        types (np.ndarray): 0-based event types.
        num_types (int): Size of the declared type universe.

    """

    horizon: float
    times: np.ndarray
    types: np.ndarray
    num_types: int

    def __post_init__(self):
        times = _frozen(self.times)
        types = _frozen(self.types, dtype=np.int64)
        if not self.horizon > 0:
            raise InputError(f"horizon must be positive, got {self.horizon}")
        if times.ndim != 1 or times.shape != types.shape:
            raise InputError("times and types must be vectors of equal length")
        if np.any(np.diff(times) < 0):
            raise InputError("event times must be sorted ascending")
        if times.size and (times[0] < 0 or times[-1] > self.horizon):
            raise DomainError(f"event times must lie in [0, {self.horizon}]")
        if types.size and (types.min() < 0 or types.max() >= self.num_types):
            raise DomainError(
                f"event types must lie in [0, {self.num_types}), "
                f"got range [{types.min()}, {types.max()}]"
            )
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "num_types", int(self.num_types))
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "types", types)

    @classmethod
    def from_events(
        cls,
        horizon: float,
        events: Sequence[tuple[float, int]],
        num_types: int,
    ) -> "EventSequence":
        """Build a sequence from (t, v) pairs, stable-sorting by time."""
        if len(events) == 0:
            return cls(horizon, np.empty(0), np.empty(0, dtype=np.int64), num_types)
        times = np.array([t for t, _ in events], dtype=float)
        types = np.array([v for _, v in events], dtype=np.int64)
        order = np.argsort(times, kind="stable")
        return cls(horizon, times[order], types[order], num_types)

    def __len__(self) -> int:
        return self.times.size

    def per_type_times(self) -> list[np.ndarray]:
        """Event times of each declared type (empty arrays for silent types)."""
        return [self.times[self.types == v] for v in range(self.num_types)]

    def distinct_types(self) -> int:
        """Number of types with at least one event."""
        return int(np.unique(self.types).size)

    def events(self) -> list[tuple[float, int]]:
        return [(float(t), int(v)) for t, v in zip(self.times, self.types, strict=True)]

    def __repr__(self):
        return (
            f"<EventSequence(T={self.horizon}, events={len(self)}, "
            f"num_types={self.num_types})>"
        )


# --- Transport ---


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """Nonnegative ground costs between two labelled collections.

    Attributes:
        values (np.ndarray): K×L cost entries.
        row_labels (tuple): Opaque identifiers of the rows.
        col_labels (tuple): Opaque identifiers of the columns.

    """

    values: np.ndarray
    row_labels: tuple = ()
    col_labels: tuple = ()

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 2 or values.size == 0:
            raise InputError(
                f"cost matrix must be a nonempty 2D array, got {values.shape}"
            )
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise InputError("cost entries must be finite and nonnegative")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "row_labels", tuple(self.row_labels))
        object.__setattr__(self, "col_labels", tuple(self.col_labels))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """A coupling between two discrete distributions with solver diagnostics.

    Attributes:
        matrix (np.ndarray): K×L nonnegative plan.
        row_marginal (np.ndarray): Target row sums.
        col_marginal (np.ndarray): Target column sums.
        cost (float): ⟨D, plan⟩ for the cost the plan was solved against.
        iterations_used (int): Scaling sweeps performed.
        converged (bool): Whether the marginal residual fell below tolerance.
        cost_history (tuple[float, ...]): ⟨D, plan⟩ after each sweep. This is
            not monotone in general.
        objective_history (tuple[float, ...]): Entropic dual objective
            (negated) after each sweep; nonincreasing.

    """

    matrix: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray
    cost: float
    iterations_used: int = 0
    converged: bool = True
    cost_history: tuple[float, ...] = field(default=())
    objective_history: tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))
        object.__setattr__(self, "row_marginal", _frozen(self.row_marginal))
        object.__setattr__(self, "col_marginal", _frozen(self.col_marginal))
        object.__setattr__(self, "cost", float(self.cost))

    @classmethod
    def from_matrix(cls, matrix, cost: float = 0.0) -> "TransportPlan":
        """Wrap a fixed coupling, reading its marginals off the matrix."""
        matrix = np.asarray(matrix, dtype=float)
        return cls(
            matrix=matrix,
            row_marginal=matrix.sum(axis=1),
            col_marginal=matrix.sum(axis=0),
            cost=cost,
        )

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def objective_rise(self) -> float:
        """Largest sweep-to-sweep increase of the dual objective."""
        if len(self.objective_history) < 2:
            return 0.0
        return max(float(np.diff(self.objective_history).max()), 0.0)

    def marginal_residual(self) -> float:
        """L1 violation of both marginal constraints."""
        rows = np.abs(self.matrix.sum(axis=1) - self.row_marginal).sum()
        cols = np.abs(self.matrix.sum(axis=0) - self.col_marginal).sum()
        return float(rows + cols)

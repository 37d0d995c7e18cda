# ghp/hawkes.py
"""The module implements finite multivariate Hawkes processes with the
exponential kernel η(t) = exp(-ωt).

λ_v(t) = μ_v + Σ_{t_i < t} a_{v v_i} exp(-ω (t - t_i)).

Because the kernel factorizes, the excitation carried by past events is a
single vector per source type that decays between events, which makes
intensity evaluation, simulation and likelihood linear in the number of
events.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_MAX_EVENTS
from .errors import (
    ConfigurationError,
    DegenerateLikelihoodError,
    DomainError,
    SimulationError,
    StationarityError,
)
from .models import EventSequence, HawkesModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StationarityCheck:
    """Outcome of the stationarity test; truthy when stationary.

    Attributes:
        stationary (bool): Whether ‖D·A‖₂ < 1.
        spectral_norm (float): ‖D·A‖₂.

    """

    stationary: bool
    spectral_norm: float

    def __bool__(self) -> bool:
        return self.stationary


def _check_types(model: HawkesModel, seq: EventSequence) -> None:
    if len(seq) and seq.types.max() >= model.num_types:
        raise DomainError(
            f"sequence uses type {seq.types.max()} but the model has "
            f"{model.num_types} types"
        )


def _excitation_states(
    times: np.ndarray, types: np.ndarray, num_types: int, rate: float
) -> np.ndarray:
    """Excitation vector seen by each event.

    Row i holds Σ_{t_j < t_i, v_j = u} exp(-ω (t_i - t_j)) for every source
    type u. Events tied with t_i are excluded.
    """
    states = np.zeros((times.size, num_types))
    state = np.zeros(num_types)
    last = 0.0
    pending: list[int] = []
    for index, (time, kind) in enumerate(zip(times, types, strict=True)):
        if time > last:
            for earlier in pending:
                state[earlier] += 1.0
            pending.clear()
            state *= np.exp(-rate * (time - last))
            last = time
        states[index] = state
        pending.append(int(kind))
    return states


def _event_intensities(
    model: HawkesModel, seq: EventSequence
) -> tuple[np.ndarray, np.ndarray]:
    states = _excitation_states(
        seq.times, seq.types, model.num_types, model.kernel_rate
    )
    rates = model.mu[seq.types] + np.einsum(
        "nu,nu->n", model.adjacency[seq.types], states
    )
    return states, rates


def _tail_masses(model: HawkesModel, seq: EventSequence) -> np.ndarray:
    """∫_{t_i}^T η(t - t_i) dt for every event."""
    rate = model.kernel_rate
    return -np.expm1(-rate * (seq.horizon - seq.times)) / rate


# --- Intensity ---


def intensity(model: HawkesModel, seq: EventSequence, t: float, v: int) -> float:
    """Conditional intensity of type `v` at time `t` given the history.

    Only events strictly before `t` contribute.

    Args:
        model (HawkesModel): The process.
        seq (EventSequence): Observed history.
        t (float): Evaluation time in [0, T].
        v (int): Event type.

    Returns:
        float: λ_v(t).

    Raises:
        DomainError: If `v` is not a type of the model or `t` is outside [0, T].

    """
    if not 0 <= v < model.num_types:
        raise DomainError(f"type {v} is not in [0, {model.num_types})")
    if not 0.0 <= t <= seq.horizon:
        raise DomainError(f"time {t} is outside [0, {seq.horizon}]")
    _check_types(model, seq)
    before = seq.times < t
    decays = np.exp(-model.kernel_rate * (t - seq.times[before]))
    return float(model.mu[v] + model.adjacency[v, seq.types[before]] @ decays)


# --- Simulation ---


def simulate_ogata(
    model: HawkesModel,
    T: float,
    rng: np.random.Generator,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> EventSequence:
    """Simulate the process on [0, T] by Ogata thinning.

    The total intensity just after the last accepted point bounds the
    intensity until the next event; a rejected candidate lowers the bound to
    the total intensity at the candidate.

    Args:
        model (HawkesModel): The process.
        T (float): Horizon.
        rng (np.random.Generator): Random source.
        max_events (int): Event budget.

    Returns:
        EventSequence: Simulated events with `num_types` = V.

    Raises:
        ConfigurationError: If T ≤ 0.
        SimulationError: If more than `max_events` events are accepted.

    """
    if not T > 0:
        raise ConfigurationError(f"horizon must be positive, got {T}")
    check = is_stationary(model)
    if not check:
        logger.warning(
            "Simulating a non-stationary model (spectral norm %.4f)",
            check.spectral_norm,
        )
    times: list[float] = []
    types: list[int] = []
    excitation = np.zeros(model.num_types)
    current = 0.0
    bound = float(model.mu.sum())
    while bound > 0.0:
        candidate = current + rng.exponential(1.0 / bound)
        if candidate > T:
            break
        excitation *= np.exp(-model.kernel_rate * (candidate - current))
        current = candidate
        rates = model.mu + model.adjacency @ excitation
        total = float(rates.sum())
        if rng.uniform() * bound <= total:
            kind = int(
                np.searchsorted(np.cumsum(rates), rng.uniform() * total, side="right")
            )
            kind = min(kind, model.num_types - 1)
            times.append(current)
            types.append(kind)
            if len(times) > max_events:
                raise SimulationError(
                    f"simulation exceeded {max_events} events before T={T}"
                )
            excitation[kind] += 1.0
            bound = float((model.mu + model.adjacency @ excitation).sum())
        else:
            bound = total
    return EventSequence(
        T, np.array(times), np.array(types, dtype=np.int64), model.num_types
    )


def simulate_branching(
    model: HawkesModel,
    T: float,
    rng: np.random.Generator,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> EventSequence:
    """Simulate the process on [0, T] through its cluster representation.

    Immigrants of type v arrive as a Poisson process of rate μ_v; every event
    of type u begins a Poisson(a_vu · D) number of children of type v, each
    delayed by an Exponential(ω) time. Generations are expanded until no
    child lands inside [0, T].

    Raises:
        ConfigurationError: If T ≤ 0.
        StationarityError: If the model is not stationary.
        SimulationError: If more than `max_events` events are generated.

    """
    if not T > 0:
        raise ConfigurationError(f"horizon must be positive, got {T}")
    check = is_stationary(model)
    if not check:
        raise StationarityError(
            f"branching simulation needs a stationary model, "
            f"spectral norm is {check.spectral_norm:.4f}"
        )
    counts = rng.poisson(model.mu * T)
    generation_times = [rng.uniform(0.0, T, count) for count in counts]
    generation_types = [np.full(count, v) for v, count in enumerate(counts)]
    times = np.concatenate(generation_times)
    types = np.concatenate(generation_types).astype(np.int64)
    all_times, all_types = [times], [types]
    offspring_means = model.adjacency * model.decay_mass
    total = times.size
    while times.size:
        child_times, child_types = [], []
        for parent_time, parent_type in zip(times, types, strict=True):
            for v, count in enumerate(rng.poisson(offspring_means[:, parent_type])):
                if count == 0:
                    continue
                delays = rng.exponential(1.0 / model.kernel_rate, count)
                kept = parent_time + delays[parent_time + delays <= T]
                child_times.append(kept)
                child_types.append(np.full(kept.size, v))
        times = np.concatenate(child_times) if child_times else np.empty(0)
        types = (
            np.concatenate(child_types).astype(np.int64)
            if child_types
            else np.empty(0, dtype=np.int64)
        )
        total += times.size
        if total > max_events:
            raise SimulationError(
                f"simulation exceeded {max_events} events before T={T}"
            )
        all_times.append(times)
        all_types.append(types)
    times = np.concatenate(all_times)
    types = np.concatenate(all_types).astype(np.int64)
    order = np.argsort(times, kind="stable")
    return EventSequence(T, times[order], types[order], model.num_types)


# --- Likelihood ---


def log_likelihood(model: HawkesModel, seq: EventSequence) -> float:
    """Exact log-likelihood of a sequence.

    Σ_i log λ_{v_i}(t_i) - Σ_v ∫_0^T λ_v(t) dt with the compensator in
    closed form. An event with zero intensity makes the likelihood zero;
    that case returns -inf and logs a warning instead of raising.

    Args:
        model (HawkesModel): The process.
        seq (EventSequence): Observed events.

    Returns:
        float: The log-likelihood, possibly -inf.

    Raises:
        DomainError: If the sequence uses a type the model lacks.

    """
    _check_types(model, seq)
    compensator = float(model.mu.sum()) * seq.horizon
    if len(seq) == 0:
        return -compensator
    _, rates = _event_intensities(model, seq)
    column_mass = model.adjacency.sum(axis=0)[seq.types]
    compensator += float(column_mass @ _tail_masses(model, seq))
    if np.any(rates <= 0.0):
        logger.warning(
            "Degenerate likelihood: %d event(s) with zero intensity",
            int(np.sum(rates <= 0.0)),
        )
        return -np.inf
    return float(np.log(rates).sum()) - compensator


def ll_gradient(
    model: HawkesModel, seq: EventSequence
) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of `log_likelihood` with respect to μ and A.

    Args:
        model (HawkesModel): The process.
        seq (EventSequence): Observed events.

    Returns:
        tuple[np.ndarray, np.ndarray]: (∂LL/∂μ of shape (V,), ∂LL/∂A of
            shape (V, V)).

    Raises:
        DegenerateLikelihoodError: If an event has zero intensity.

    """
    _check_types(model, seq)
    size = model.num_types
    grad_mu = np.full(size, -seq.horizon)
    grad_adjacency = np.zeros((size, size))
    if len(seq) == 0:
        return grad_mu, grad_adjacency
    states, rates = _event_intensities(model, seq)
    if np.any(rates <= 0.0):
        raise DegenerateLikelihoodError(
            "an observed event has zero intensity; the gradient is undefined"
        )
    inverse = 1.0 / rates
    grad_mu += np.bincount(seq.types, weights=inverse, minlength=size)
    np.add.at(grad_adjacency, seq.types, states * inverse[:, None])
    tails = np.bincount(seq.types, weights=_tail_masses(model, seq), minlength=size)
    grad_adjacency -= tails[None, :]
    return grad_mu, grad_adjacency


# --- Stationary behaviour ---


def is_stationary(model: HawkesModel) -> StationarityCheck:
    """Test ‖D·A‖₂ < 1 (spectral norm via SVD)."""
    norm = float(np.linalg.norm(model.branching_matrix, 2))
    return StationarityCheck(stationary=norm < 1.0, spectral_norm=norm)


def spectral_radius(model: HawkesModel) -> float:
    """Largest eigenvalue modulus of the branching matrix D·A."""
    return float(np.max(np.abs(np.linalg.eigvals(model.branching_matrix))))


def average_intensity(model: HawkesModel) -> np.ndarray:
    """Stationary mean rates λ̄ = (I - D·A)^{-1} μ.

    Raises:
        StationarityError: If the spectral radius of D·A is at least one.

    """
    branching = model.branching_matrix
    radius = spectral_radius(model)
    if radius >= 1.0:
        raise StationarityError(
            f"spectral radius of D·A is {radius:.4f}; the average intensity "
            "does not exist"
        )
    rates = np.linalg.solve(np.eye(model.num_types) - branching, model.mu)
    return np.clip(rates, 0.0, None)

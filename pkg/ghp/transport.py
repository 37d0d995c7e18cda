# ghp/transport.py
"""The module holds the optimal transport machinery.

It includes the entropic Sinkhorn solver, the closed-form one-dimensional
Wasserstein distance, the counting-process ground distance between single
event streams, the two-level (hierarchical) transport distance between sets
of event sequences, and proximal solvers for the discrete Gromov-Wasserstein
and fused Gromov-Wasserstein problems.

Sequence-level distances use the linear cost ⟨D, T⟩. The square-root
convention appears only in `emd_1d` and `gw_distance`.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .config import (
    DEFAULT_BETA_RATIO,
    DEFAULT_FGW_ALPHA,
    DEFAULT_FGW_INNER_ITERS,
    DEFAULT_FGW_ITERS,
    LOG_DOMAIN_RATIO,
    SINKHORN_MAX_ITER,
    SINKHORN_TOL,
)
from .errors import ConfigurationError, InputError, TransportError
from .models import CostMatrix, EventSequence, TransportPlan
from .seeding import pairs, parallel_map

logger = logging.getLogger(__name__)

MARGINAL_ATOL = 1e-8
OBJECTIVE_RTOL = 1e-9


@dataclass(frozen=True)
class HotResult:
    """Outcome of the two-level transport between two sets of sequences.

    Attributes:
        distance (float): ⟨D, Q⟩.
        plan (TransportPlan): Outer coupling Q over (generated, real) pairs.
        inner_plans (list[list[TransportPlan]]): Type coupling of every pair.
        inner_costs (CostMatrix): Inner distances D.

    """

    distance: float
    plan: TransportPlan
    inner_plans: list[list[TransportPlan]]
    inner_costs: CostMatrix


# --- Helpers ---


def _as_cost(cost) -> CostMatrix:
    return cost if isinstance(cost, CostMatrix) else CostMatrix(np.asarray(cost))


def _marginal(values, size: int, name: str) -> np.ndarray:
    vector = np.asarray(values, dtype=float)
    if vector.shape != (size,):
        raise InputError(f"{name} must have length {size}, got shape {vector.shape}")
    if np.any(vector < 0) or abs(vector.sum() - 1.0) > MARGINAL_ATOL:
        raise InputError(f"{name} must be a probability vector (sum {vector.sum()})")
    return vector


def uniform(size: int) -> np.ndarray:
    return np.full(size, 1.0 / size)


def default_beta(values: np.ndarray) -> float:
    """Regularization used when none is given: a fraction of the median cost."""
    positive = np.asarray(values)[np.asarray(values) > 0]
    if positive.size == 0:
        return 1.0
    return DEFAULT_BETA_RATIO * float(np.median(positive))


def _forced_plan(values: np.ndarray, p: np.ndarray, q: np.ndarray) -> TransportPlan:
    matrix = np.outer(p, q)
    cost = float(np.sum(values * matrix))
    return TransportPlan(matrix, p, q, cost, 0, True, (cost,))


def _dual_objective(plan, log_a, log_b, p, q) -> float:
    """Negated entropic dual objective of the current scalings, divided by β.

    Each half-sweep of the scaling iteration minimizes this value exactly
    over one block of scalings, so it never increases from sweep to sweep.
    """
    rows, cols = p > 0, q > 0
    return float(
        plan.sum() - np.dot(p[rows], log_a[rows]) - np.dot(q[cols], log_b[cols])
    )


def _scale(
    log_kernel: np.ndarray,
    p: np.ndarray,
    q: np.ndarray,
    max_iter: int,
    tol: float,
    log_domain: bool,
    cost: np.ndarray | None = None,
    duals: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[
    np.ndarray, int, bool, list[tuple[float, float]], tuple[np.ndarray, np.ndarray]
]:
    """Alternate the column and row scalings of exp(log_kernel).

    Returns the plan, sweeps used, convergence flag, the (cost, objective)
    pair after each sweep (when `cost` is given) and the final log-scalings.
    The objective is `_dual_objective` in units of β.
    """
    history: list[tuple[float, float]] = []
    with np.errstate(divide="ignore"):
        log_p, log_q = np.log(p), np.log(q)
    log_a, log_b = duals if duals is not None else (np.zeros(p.size), np.zeros(q.size))
    kernel = None if log_domain else np.exp(log_kernel)
    if kernel is not None:
        a, b = np.exp(log_a), np.exp(log_b)
    plan = np.zeros_like(log_kernel)
    converged = False
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        if log_domain:
            log_b = log_q - logsumexp(log_kernel + log_a[:, None], axis=0)
            log_a = log_p - logsumexp(log_kernel + log_b[None, :], axis=1)
            plan = np.exp(log_a[:, None] + log_kernel + log_b[None, :])
        else:
            b = q / (kernel.T @ a)
            a = p / (kernel @ b)
            plan = a[:, None] * kernel * b[None, :]
        if cost is not None:
            if not log_domain:
                with np.errstate(divide="ignore"):
                    log_a, log_b = np.log(a), np.log(b)
            history.append(
                (
                    float(np.sum(cost * plan)),
                    _dual_objective(plan, log_a, log_b, p, q),
                )
            )
        residual = (
            np.abs(plan.sum(axis=0) - q).sum() + np.abs(plan.sum(axis=1) - p).sum()
        )
        if residual < tol:
            converged = True
            break
    if not log_domain:
        with np.errstate(divide="ignore"):
            log_a, log_b = np.log(a), np.log(b)
    return plan, sweeps, converged, history, (log_a, log_b)


# --- Sinkhorn ---


def sinkhorn(
    cost,
    p=None,
    q=None,
    beta: float | None = None,
    max_iter: int = SINKHORN_MAX_ITER,
    tol: float = SINKHORN_TOL,
) -> TransportPlan:
    """Entropic optimal transport by Sinkhorn scaling.

    The kernel is C = exp(-D/β). Scalings alternate b = q / (Cᵀa) and
    a = p / (Cb); the plan is diag(a) C diag(b). The iteration runs on log
    scalings whenever β < 1e-2 · max(D).

    Args:
        cost (CostMatrix | np.ndarray): Ground costs D, shape (K, L).
        p (np.ndarray | None): Row marginal; uniform when omitted.
        q (np.ndarray | None): Column marginal; uniform when omitted.
        beta (float | None): Regularization; `default_beta(D)` when omitted.
        max_iter (int): Sweep budget.
        tol (float): L1 marginal residual that counts as converged.

    Returns:
        TransportPlan: The plan with cost ⟨D, plan⟩ and diagnostics.

    Raises:
        InputError: If a marginal is not a probability vector.
        ConfigurationError: If β ≤ 0 or max_iter < 1.
        TransportError: If the kernel underflows (retry with a larger β).

    """
    values = _as_cost(cost).values
    rows, cols = values.shape
    p = uniform(rows) if p is None else _marginal(p, rows, "p")
    q = uniform(cols) if q is None else _marginal(q, cols, "q")
    beta = default_beta(values) if beta is None else float(beta)
    if not beta > 0:
        raise ConfigurationError(f"beta must be positive, got {beta}")
    if max_iter < 1:
        raise ConfigurationError(f"max_iter must be at least 1, got {max_iter}")

    log_kernel = -values / beta
    log_domain = beta < LOG_DOMAIN_RATIO * float(values.max())
    if not log_domain:
        kernel = np.exp(log_kernel)
        if np.any(kernel.sum(axis=1) == 0) or np.any(kernel.sum(axis=0) == 0):
            raise TransportError(
                f"Sinkhorn kernel underflowed at beta={beta:.3g}; use a larger beta"
            )
    plan, sweeps, converged, history, _ = _scale(
        log_kernel, p, q, max_iter, tol, log_domain, cost=values
    )
    if not converged:
        logger.warning(
            "Sinkhorn did not converge in %d sweeps (beta=%.3g)", max_iter, beta
        )
    result = TransportPlan(
        matrix=plan,
        row_marginal=p,
        col_marginal=q,
        cost=float(np.sum(values * plan)),
        iterations_used=sweeps,
        converged=converged,
        cost_history=tuple(entry[0] for entry in history),
        objective_history=tuple(beta * entry[1] for entry in history),
    )
    scale = max(1.0, float(values.max()), abs(result.objective_history[0]))
    if result.objective_rise() > OBJECTIVE_RTOL * scale:
        logger.warning(
            "Sinkhorn objective rose by %.3g between sweeps", result.objective_rise()
        )
    return result


# --- One-dimensional Wasserstein ---


def _points(values, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=float).ravel()
    if array.size == 0:
        raise InputError(f"{name} must contain at least one point")
    return array


def emd_1d_plan(a, b) -> tuple[float, np.ndarray]:
    """Monotone (quantile) coupling of two uniform point clouds on the line.

    Args:
        a (array-like): M points.
        b (array-like): N points.

    Returns:
        tuple[float, np.ndarray]: The 2-Wasserstein distance and the M×N
            coupling.

    Raises:
        InputError: If either cloud is empty.

    """
    a, b = _points(a, "a"), _points(b, "b")
    order_a, order_b = np.argsort(a, kind="stable"), np.argsort(b, kind="stable")
    rows, cols = a.size, b.size
    upper = np.union1d(np.arange(1, rows + 1) / rows, np.arange(1, cols + 1) / cols)
    lower = np.concatenate([[0.0], upper[:-1]])
    mass = upper - lower
    middle = 0.5 * (lower + upper)
    index_a = np.minimum((middle * rows).astype(int), rows - 1)
    index_b = np.minimum((middle * cols).astype(int), cols - 1)
    plan = np.zeros((rows, cols))
    np.add.at(plan, (order_a[index_a], order_b[index_b]), mass)
    sorted_a, sorted_b = a[order_a], b[order_b]
    if rows == cols:
        distance = float(np.linalg.norm(sorted_a - sorted_b) / np.sqrt(rows))
    else:
        gaps = sorted_a[index_a] - sorted_b[index_b]
        distance = float(np.sqrt(np.sum(mass * gaps**2)))
    return distance, plan


def emd_1d(a, b) -> float:
    """2-Wasserstein distance between uniform point clouds on the line.

    For equal sizes this is (1/√N)·‖sort(a) - sort(b)‖₂.
    """
    return emd_1d_plan(a, b)[0]


# --- Counting-process distances ---


def _padded(times: np.ndarray, length: int, horizon: float) -> np.ndarray:
    padded = np.full(length, horizon)
    padded[: times.size] = times
    return padded


def counting_distance(u, v, T: float) -> float:
    """(1/T)·∫_0^T |N_u(t) - N_v(t)| dt for two sorted single-type streams.

    With I ≤ J events, the integral is Σ_{i≤I} |t_i^u - t_i^v| plus
    Σ_{i>I} (T - t_i^v), i.e. the L1 gap of both lists padded with T.

    Raises:
        InputError: If a list is unsorted or has times outside [0, T].

    """
    if not T > 0:
        raise InputError(f"horizon must be positive, got {T}")
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    for name, times in (("u", u), ("v", v)):
        if np.any(np.diff(times) < 0):
            raise InputError(f"event times {name} must be sorted ascending")
        if times.size and (times[0] < 0 or times[-1] > T):
            raise InputError(f"event times {name} must lie in [0, {T}]")
    length = max(u.size, v.size)
    gap = np.abs(_padded(u, length, T) - _padded(v, length, T)).sum()
    return float(gap / T)


def counting_distance_matrix(
    seqA: EventSequence, seqB: EventSequence, T: float | None = None
) -> CostMatrix:
    """Counting distances between every type of `seqA` and every type of `seqB`.

    Silent types are empty streams. T defaults to the larger horizon.
    """
    horizon = max(seqA.horizon, seqB.horizon) if T is None else float(T)
    streams_a, streams_b = seqA.per_type_times(), seqB.per_type_times()
    length = max((times.size for times in streams_a + streams_b), default=0)
    padded_a = np.array([_padded(times, length, horizon) for times in streams_a])
    padded_b = np.array([_padded(times, length, horizon) for times in streams_b])
    padded_a = padded_a.reshape(len(streams_a), length)
    padded_b = padded_b.reshape(len(streams_b), length)
    values = np.abs(padded_a[:, None, :] - padded_b[None, :, :]).sum(axis=2) / horizon
    return CostMatrix(
        values,
        row_labels=tuple(range(seqA.num_types)),
        col_labels=tuple(range(seqB.num_types)),
    )


def aligned_distance(seqA: EventSequence, seqB: EventSequence) -> float:
    """Mean counting distance between same-index types.

    Applies when types of the two sequences correspond one to one.

    Raises:
        InputError: If the type universes differ.

    """
    if seqA.num_types != seqB.num_types or seqA.num_types == 0:
        raise InputError(
            "aligned distance needs equal, nonempty type universes "
            f"({seqA.num_types} vs {seqB.num_types})"
        )
    return float(np.mean(np.diag(counting_distance_matrix(seqA, seqB).values)))


# --- Hierarchical transport ---


def inner_ot(
    seqA: EventSequence,
    seqB: EventSequence,
    beta: float | None = None,
    max_iter: int = SINKHORN_MAX_ITER,
    tol: float = SINKHORN_TOL,
) -> tuple[float, TransportPlan]:
    """Transport distance between the event types of two sequences.

    Args:
        seqA (EventSequence): First sequence, K types.
        seqB (EventSequence): Second sequence, L types.
        beta (float | None): Sinkhorn regularization.
        max_iter (int): Sinkhorn sweep budget.
        tol (float): Sinkhorn tolerance.

    Returns:
        tuple[float, TransportPlan]: ⟨D, T*⟩ and the type coupling T* with
            uniform marginals.

    Raises:
        InputError: If either sequence declares zero types.

    """
    if seqA.num_types == 0 or seqB.num_types == 0:
        raise InputError("inner transport needs at least one type per sequence")
    cost = counting_distance_matrix(seqA, seqB)
    p, q = uniform(seqA.num_types), uniform(seqB.num_types)
    if seqA.num_types == 1 or seqB.num_types == 1:
        plan = _forced_plan(cost.values, p, q)
    else:
        plan = sinkhorn(cost, p, q, beta=beta, max_iter=max_iter, tol=tol)
    return plan.cost, plan


def outer_ot(
    cost,
    beta: float | None = None,
    max_iter: int = SINKHORN_MAX_ITER,
    tol: float = SINKHORN_TOL,
) -> TransportPlan:
    """Uniform-marginal coupling of two sets given their distance matrix."""
    values = _as_cost(cost).values
    p, q = uniform(values.shape[0]), uniform(values.shape[1])
    if min(values.shape) == 1:
        return _forced_plan(values, p, q)
    return sinkhorn(values, p, q, beta=beta, max_iter=max_iter, tol=tol)


def hot_distance(
    setA: list[EventSequence],
    setB: list[EventSequence],
    beta: float | None = None,
    inner_beta: float | None = None,
    threads: int | None = None,
    aligned: bool = False,
) -> HotResult:
    """Two-level transport distance between two sets of event sequences.

    The K×L inner distances are computed independently (in parallel), then
    coupled with uniform marginals. The outer plan Q is the joint weighting
    q(generated_k, real_l) used by the learner.

    Args:
        setA (list[EventSequence]): K sequences.
        setB (list[EventSequence]): L sequences.
        beta (float | None): Outer Sinkhorn regularization.
        inner_beta (float | None): Inner Sinkhorn regularization.
        threads (int | None): Worker cap for the inner solves.
        aligned (bool): Use the same-index type distance instead of the inner
            transport (type universes must match).

    Returns:
        HotResult: Distance, outer plan, inner plans and inner distances.

    Raises:
        InputError: If either set is empty.

    """
    if not setA or not setB:
        raise InputError("both sequence sets must be nonempty")

    def solve(pair: tuple[int, int]) -> tuple[float, TransportPlan]:
        first, second = setA[pair[0]], setB[pair[1]]
        if aligned:
            distance = aligned_distance(first, second)
            identity = np.eye(first.num_types) / first.num_types
            return distance, TransportPlan.from_matrix(identity, cost=distance)
        return inner_ot(first, second, beta=inner_beta)

    index = pairs(setA, setB)
    solved = parallel_map(solve, index, threads)
    values = np.zeros((len(setA), len(setB)))
    inner_plans: list[list[TransportPlan]] = [[None] * len(setB) for _ in setA]
    for (k, j), (distance, plan) in zip(index, solved, strict=True):
        values[k, j] = distance
        inner_plans[k][j] = plan
    inner_costs = CostMatrix(values)
    plan = outer_ot(inner_costs, beta=beta)
    return HotResult(plan.cost, plan, inner_plans, inner_costs)


# --- Gromov-Wasserstein ---


def _square(matrix, name: str) -> np.ndarray:
    array = np.asarray(matrix, dtype=float)
    if array.ndim != 2 or array.shape[0] != array.shape[1] or array.size == 0:
        raise InputError(f"{name} must be a nonempty square matrix, got {array.shape}")
    return array


def _random_coupling(
    rng: np.random.Generator, p: np.ndarray, q: np.ndarray
) -> np.ndarray:
    log_kernel = np.log(rng.uniform(0.1, 1.0, (p.size, q.size)))
    plan, *_ = _scale(log_kernel, p, q, DEFAULT_FGW_INNER_ITERS, 1e-12, True)
    return plan


def _fused_objective(cost_f, constant, Ga, Gb, plan) -> float:
    return float(np.sum((cost_f + constant - 2.0 * Ga @ plan @ Gb.T) * plan))


def gw_objective(A1, A2, plan) -> float:
    """(Σ t_mn t_m'n' |a_mm' - b_nn'|²)^{1/2} for a given coupling."""
    A1, A2 = _square(A1, "A1"), _square(A2, "A2")
    plan = np.asarray(plan, dtype=float)
    if plan.shape != (A1.shape[0], A2.shape[0]):
        raise InputError(
            f"plan shape {plan.shape} does not match ({A1.shape[0]}, {A2.shape[0]})"
        )
    gaps = (A1[:, None, :, None] - A2[None, :, None, :]) ** 2
    return float(np.sqrt(np.einsum("mn,mnkl,kl->", plan, gaps, plan)))


def _proximal_fgw(
    cost_f: np.ndarray,
    Ga: np.ndarray,
    Gb: np.ndarray,
    alpha: float,
    iters: int,
    restarts: int,
    rng: np.random.Generator | None,
) -> tuple[float, np.ndarray]:
    """Proximal point iteration on ⟨D_f + D_g - 2·Ga·T·Gbᵀ, T⟩.

    Each step solves an entropic transport whose kernel is
    exp(-L(T)/α) ∘ T, so the KL distance to the previous plan acts as the
    proximal term. α is relative to the largest entry of the first L.
    """
    if not alpha > 0:
        raise ConfigurationError(f"alpha must be positive, got {alpha}")
    if iters < 1:
        raise ConfigurationError(f"iters must be at least 1, got {iters}")
    p, q = uniform(Ga.shape[0]), uniform(Gb.shape[0])
    constant = ((Ga**2) @ p)[:, None] + ((Gb**2) @ q)[None, :]

    starts = [np.outer(p, q)]
    if restarts > 0:
        rng = rng if rng is not None else np.random.default_rng(0)
        starts += [_random_coupling(rng, p, q) for _ in range(restarts)]

    best_value, best_plan = np.inf, starts[0]
    for plan in starts:
        linear = cost_f + constant - 2.0 * Ga @ plan @ Gb.T
        scale = float(np.abs(linear).max()) or 1.0
        step = alpha * scale
        duals = None
        for iteration in range(iters):
            with np.errstate(divide="ignore"):
                log_kernel = np.log(plan) - linear / step
            updated, _, _, _, duals = _scale(
                log_kernel, p, q, DEFAULT_FGW_INNER_ITERS, 1e-10, True, duals=duals
            )
            change = np.abs(updated - plan).sum()
            plan = updated
            if change < 1e-12:
                logger.debug("proximal solver settled after %d steps", iteration + 1)
                break
            linear = cost_f + constant - 2.0 * Ga @ plan @ Gb.T
        value = _fused_objective(cost_f, constant, Ga, Gb, plan)
        if value < best_value:
            best_value, best_plan = value, plan
    return max(best_value, 0.0), best_plan


def gw_distance(
    A1,
    A2,
    alpha: float = DEFAULT_FGW_ALPHA,
    iters: int = DEFAULT_FGW_ITERS,
    restarts: int = 0,
    rng: np.random.Generator | None = None,
) -> tuple[float, np.ndarray]:
    """Discrete Gromov-Wasserstein distance between two square matrices.

    (Σ t_mn t_m'n' |a_mm' - b_nn'|²)^{1/2} minimized over uniform couplings.
    The problem is non-convex: the result is a local optimum, the best over
    the product start and `restarts` random starts.

    Raises:
        InputError: If either matrix is not square.

    """
    A1, A2 = _square(A1, "A1"), _square(A2, "A2")
    if A1.shape == A2.shape == (1, 1):
        return float(abs(A1[0, 0] - A2[0, 0])), np.ones((1, 1))
    cost_f = np.zeros((A1.shape[0], A2.shape[0]))
    value, plan = _proximal_fgw(cost_f, A1, A2, alpha, iters, restarts, rng)
    return float(np.sqrt(value)), plan


def fgw_discrete(
    fa,
    Ga,
    fb,
    Gb,
    alpha: float = DEFAULT_FGW_ALPHA,
    iters: int = DEFAULT_FGW_ITERS,
    restarts: int = 0,
    rng: np.random.Generator | None = None,
) -> tuple[float, np.ndarray]:
    """Fused Gromov-Wasserstein distance between two discretized graphons.

    Minimizes ⟨D_f, T⟩ + Σ t_mn t_m'n' |Ga_mm' - Gb_nn'|² with
    D_f[m, n] = (fa_m - fb_n)², by the proximal solver.

    Args:
        fa (array-like): Node features of the first model, length N.
        Ga (array-like): N×N edge values of the first model.
        fb (array-like): Node features of the second model, length M.
        Gb (array-like): M×M edge values of the second model.
        alpha (float): Relative proximal weight.
        iters (int): Proximal steps per start.
        restarts (int): Extra random starts.
        rng (np.random.Generator | None): Source for the random starts.

    Returns:
        tuple[float, np.ndarray]: Objective value and the N×M plan.

    Raises:
        InputError: If a feature vector does not match its matrix.

    """
    Ga, Gb = _square(Ga, "Ga"), _square(Gb, "Gb")
    fa = np.asarray(fa, dtype=float).ravel()
    fb = np.asarray(fb, dtype=float).ravel()
    if fa.size != Ga.shape[0] or fb.size != Gb.shape[0]:
        raise InputError(
            f"feature lengths ({fa.size}, {fb.size}) do not match matrix sizes "
            f"({Ga.shape[0]}, {Gb.shape[0]})"
        )
    cost_f = (fa[:, None] - fb[None, :]) ** 2
    return _proximal_fgw(cost_f, Ga, Gb, alpha, iters, restarts, rng)

# ghp/evaluation.py
"""The module evaluates learned graphons and checks their guarantees.

It includes the fused Gromov-Wasserstein distance between two graphon
models, the transport distance between a model and a test corpus, the
kernel density alignment of real event types to graphon coordinates, the
test negative log-likelihood of aligned sequences, and an empirical harness
for the stationarity, Lipschitz and average-intensity bounds of sampled
model pairs.
"""

import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .config import (
    DEFAULT_BANDWIDTH,
    DEFAULT_FGW_ALPHA,
    DEFAULT_FGW_GRID,
    DEFAULT_FGW_ITERS,
    DEFAULT_GRAPHON_RESOLUTION,
    DEFAULT_KDE_GRID,
    DEFAULT_LIPSCHITZ_GRID,
)
from .errors import ConfigurationError, InputError, StationarityError
from .graphon import (
    estimate_lipschitz,
    eval_f,
    g_matrix,
    model_from_latents,
    sample_hp,
    sample_sequences,
)
from .hawkes import average_intensity, is_stationary, log_likelihood
from .models import (
    EventSequence,
    GraphonParams,
    HawkesModel,
    LipschitzEstimate,
    TransportPlan,
)
from .schemas import AlignmentRecord
from .seeding import parallel_map, spawn
from .transport import (
    HotResult,
    emd_1d,
    emd_1d_plan,
    fgw_discrete,
    gw_distance,
    gw_objective,
    hot_distance,
)

logger = logging.getLogger(__name__)

# Relative slack of every bound check
BOUND_SLACK = 1e-6
# Largest size for which GW couplings are also searched over permutations
PERMUTATION_LIMIT = 6
# Relative tolerance under which two density values count as tied
TIE_TOLERANCE = 1e-9


# --- Model-level distances ---


def discretize_graphon(
    params: GraphonParams, resolution: int = DEFAULT_GRAPHON_RESOLUTION
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample f and g on a uniform grid over [0, 1] for external plotting.

    Returns:
        tuple[np.ndarray, np.ndarray, np.ndarray]: The grid, f on the grid
            and g on the grid square.

    Raises:
        ConfigurationError: If `resolution` < 2.

    """
    if resolution < 2:
        raise ConfigurationError(f"resolution must be at least 2, got {resolution}")
    grid = np.linspace(0.0, 1.0, resolution)
    return grid, eval_f(params, grid), g_matrix(params, grid)


def model_fgw(
    paramsA: GraphonParams,
    paramsB: GraphonParams,
    grid_n: int = DEFAULT_FGW_GRID,
    alpha: float = DEFAULT_FGW_ALPHA,
    iters: int = DEFAULT_FGW_ITERS,
    restarts: int = 0,
    rng: np.random.Generator | None = None,
) -> float:
    """Fused Gromov-Wasserstein distance between two graphon models.

    Both models are read on the grid {0, 1/N, ..., (N-1)/N}; f values act as
    node features and g values as edge weights.

    Args:
        paramsA (GraphonParams): First model.
        paramsB (GraphonParams): Second model.
        grid_n (int): Grid size N.
        alpha (float): Relative proximal weight.
        iters (int): Proximal steps per start.
        restarts (int): Extra random starts.
        rng (np.random.Generator | None): Source for the random starts.

    Returns:
        float: The discrete FGW objective.

    Raises:
        ConfigurationError: If `grid_n` < 2.

    """
    if grid_n < 2:
        raise ConfigurationError(f"grid_n must be at least 2, got {grid_n}")
    grid = np.arange(grid_n) / grid_n
    value, _ = fgw_discrete(
        eval_f(paramsA, grid),
        g_matrix(paramsA, grid),
        eval_f(paramsB, grid),
        g_matrix(paramsB, grid),
        alpha=alpha,
        iters=iters,
        restarts=restarts,
        rng=rng,
    )
    return value


# --- Sequence-level distances ---


def match_generated(
    model: GraphonParams,
    test: Sequence[EventSequence],
    n_gen: int,
    T: float,
    rng: np.random.Generator,
    threads: int | None = None,
    beta: float | None = None,
) -> tuple[list[tuple[HawkesModel, EventSequence]], HotResult]:
    """Generate `n_gen` sequences from the graphon and couple them to `test`.

    Raises:
        InputError: If the test set is empty.
        ConfigurationError: If `n_gen` < 1.

    """
    if not test:
        raise InputError("test set is empty")
    if n_gen < 1:
        raise ConfigurationError(f"n_gen must be at least 1, got {n_gen}")
    generated = sample_sequences(model, n_gen, T, rng, threads)
    result = hot_distance(
        [seq for _, seq in generated], list(test), beta=beta, threads=threads
    )
    return generated, result


def set_ot_metric(
    model: GraphonParams,
    test: Sequence[EventSequence],
    n_gen: int,
    T: float,
    rng: np.random.Generator,
    threads: int | None = None,
    beta: float | None = None,
) -> float:
    """Hierarchical transport distance between generated sequences and `test`."""
    _, result = match_generated(model, test, n_gen, T, rng, threads, beta)
    return result.distance


# --- Latent type alignment ---


@dataclass(frozen=True, eq=False)
class AlignmentResult:
    """Density of the graphon coordinate of one real event type.

    Attributes:
        sequence (int | None): Test sequence index, None when pooled.
        type (int): Real event type.
        x_star (float | None): Grid argmax of the density; None if unaligned.
        density (np.ndarray): Density on the uniform grid over [0, 1].
        grid_n (int): Grid size.
        landmarks (int): Number of weighted generated coordinates used.

    """

    sequence: int | None
    type: int
    x_star: float | None
    density: np.ndarray
    grid_n: int
    landmarks: int

    @property
    def aligned(self) -> bool:
        return self.x_star is not None

    def to_record(self) -> AlignmentRecord:
        return AlignmentRecord(
            sequence=self.sequence,
            type=self.type,
            x_star=self.x_star,
            density=self.density.tolist(),
            grid=self.grid_n,
            landmarks=self.landmarks,
        )


def _kde(
    sequence: int | None,
    kind: int,
    landmarks: np.ndarray,
    weights: np.ndarray,
    grid: np.ndarray,
    bandwidth: float,
) -> AlignmentResult:
    keep = weights > 0
    landmarks, weights = landmarks[keep], weights[keep]
    raw = np.zeros(grid.size)
    if weights.size:
        offsets = (grid[:, None] - landmarks[None, :]) / bandwidth
        raw = np.exp(-0.5 * offsets**2) @ weights
    total = raw.sum()
    if not total > 0:
        logger.warning("Event type %d has no transport mass; left unaligned", kind)
        return AlignmentResult(sequence, kind, None, raw, grid.size, 0)
    step = grid[1] - grid[0]
    density = raw / (total * step)
    best = int(np.flatnonzero(raw >= raw.max() * (1.0 - TIE_TOLERANCE))[0])
    return AlignmentResult(
        sequence, kind, float(grid[best]), density, grid.size, int(weights.size)
    )


def align_types(
    Q: TransportPlan,
    inner_plans: Sequence[Sequence[TransportPlan]],
    gen_latents: Sequence[np.ndarray],
    bandwidth: float = DEFAULT_BANDWIDTH,
    grid_n: int = DEFAULT_KDE_GRID,
    all_pairs: bool = False,
) -> list[AlignmentResult]:
    """Estimate the graphon coordinate of every real event type.

    The generated type u of sequence k is a landmark at its latent coordinate
    with weight T*_kl[u, v] · Q[k, l] for real type v of test sequence l. A
    Gaussian kernel density of the landmarks is evaluated on a uniform grid
    and its argmax (lowest coordinate on ties) is the aligned coordinate.

    Args:
        Q (TransportPlan): K×L outer plan.
        inner_plans (Sequence[Sequence[TransportPlan]]): K×L inner plans.
        gen_latents (Sequence[np.ndarray]): Latent coordinates of the K
            generated models.
        bandwidth (float): Kernel bandwidth σ.
        grid_n (int): Grid size.
        all_pairs (bool): Pool landmarks over all test sequences per real
            type instead of keeping sequences apart.

    Returns:
        list[AlignmentResult]: One result per (sequence, type), ordered by
            sequence then type; one per type when pooled.

    Raises:
        InputError: If the plans and latents disagree in shape.
        ConfigurationError: If `bandwidth` ≤ 0 or `grid_n` < 2.

    """
    if not bandwidth > 0:
        raise ConfigurationError(f"bandwidth must be positive, got {bandwidth}")
    if grid_n < 2:
        raise ConfigurationError(f"grid_n must be at least 2, got {grid_n}")
    rows, cols = Q.shape
    if len(inner_plans) != rows or any(len(row) != cols for row in inner_plans):
        raise InputError(f"inner plans do not form a {rows}×{cols} grid")
    if len(gen_latents) != rows:
        raise InputError(f"expected {rows} latent vectors, got {len(gen_latents)}")
    latents = [np.asarray(x, dtype=float).ravel() for x in gen_latents]
    for k, row in enumerate(inner_plans):
        for plan in row:
            if plan.shape[0] != latents[k].size:
                raise InputError(
                    f"inner plan rows ({plan.shape[0]}) do not match the "
                    f"{latents[k].size} latent coordinates of sequence {k}"
                )
    for j in range(cols):
        if len({inner_plans[k][j].shape[1] for k in range(rows)}) != 1:
            raise InputError(f"inner plans disagree on the types of sequence {j}")

    grid = np.linspace(0.0, 1.0, grid_n)
    coordinates = np.concatenate(latents)

    def weights_for(j: int, kind: int) -> np.ndarray:
        return np.concatenate(
            [inner_plans[k][j].matrix[:, kind] * Q.matrix[k, j] for k in range(rows)]
        )

    results: list[AlignmentResult] = []
    if all_pairs:
        num_types = max(inner_plans[0][j].shape[1] for j in range(cols))
        for kind in range(num_types):
            pooled = sum(
                weights_for(j, kind)
                for j in range(cols)
                if kind < inner_plans[0][j].shape[1]
            )
            results.append(_kde(None, kind, coordinates, pooled, grid, bandwidth))
        return results
    for j in range(cols):
        for kind in range(inner_plans[0][j].shape[1]):
            results.append(
                _kde(j, kind, coordinates, weights_for(j, kind), grid, bandwidth)
            )
    return results


def aligned_coordinates(
    results: Sequence[AlignmentResult], num_types: int, fallback: float = 0.5
) -> np.ndarray:
    """Coordinates of types 0..num_types-1 read from alignment results.

    Unaligned or missing types sit at `fallback`.
    """
    coords = np.full(num_types, fallback)
    for result in results:
        if result.aligned and result.type < num_types:
            coords[result.type] = result.x_star
    return coords


def test_nll(params: GraphonParams, seq: EventSequence, aligned_x) -> float:
    """Negative log-likelihood of `seq` under the model at aligned coordinates.

    Returns +inf (with a logged warning) when an event has zero intensity.

    Raises:
        InputError: If `aligned_x` does not give one coordinate per type.

    """
    aligned_x = np.asarray(aligned_x, dtype=float).ravel()
    if aligned_x.size != seq.num_types:
        raise InputError(
            f"{aligned_x.size} aligned coordinates for {seq.num_types} types"
        )
    return -log_likelihood(model_from_latents(params, aligned_x), seq)


test_nll.__test__ = False


# --- Guarantee verification ---


@dataclass(frozen=True)
class BoundCheck:
    """One inequality lhs ≤ rhs evaluated on a model pair.

    `approximate` marks a left side computed by a local solver; it is then an
    upper bound on the exact value, which keeps the check conservative.
    """

    name: str
    lhs: float
    rhs: float
    approximate: bool = False
    strict: bool = False

    @property
    def holds(self) -> bool:
        if self.strict:
            return bool(self.lhs < self.rhs)
        return bool(self.lhs <= self.rhs + BOUND_SLACK * abs(self.rhs))


@dataclass
class PairCheck:
    """All bound checks for one pair of sampled models."""

    sizes: tuple[int, int]
    checks: list[BoundCheck] = field(default_factory=list)
    inestimable: list[str] = field(default_factory=list)

    @property
    def violations(self) -> list[str]:
        return [check.name for check in self.checks if not check.holds]


def _gw_upper(
    A1: np.ndarray,
    A2: np.ndarray,
    plan_x: np.ndarray,
    rng: np.random.Generator,
    restarts: int,
    iters: int,
) -> tuple[float, bool]:
    """Smallest GW value over candidate couplings.

    Candidates are the latent plan, the proximal solver and, for equal sizes
    up to PERMUTATION_LIMIT, every permutation coupling.

    The flag is False only when permutations were searched.
    """
    candidates = [gw_objective(A1, A2, plan_x)]
    candidates.append(gw_distance(A1, A2, iters=iters, restarts=restarts, rng=rng)[0])
    size = A1.shape[0]
    exhaustive = size == A2.shape[0] and size <= PERMUTATION_LIMIT
    if exhaustive:
        for perm in itertools.permutations(range(size)):
            plan = np.zeros((size, size))
            plan[np.arange(size), perm] = 1.0 / size
            candidates.append(gw_objective(A1, A2, plan))
    return min(candidates), not exhaustive


def check_pair(
    model1: HawkesModel,
    model2: HawkesModel,
    lipschitz: LipschitzEstimate,
    v_max: int = 1,
    rng: np.random.Generator | None = None,
    gw_restarts: int = 2,
    gw_iters: int = 50,
) -> PairCheck:
    """Evaluate the guarantees of a pair of models sampled from one graphon.

    Checks stationarity of both models, the bi-Lipschitz bounds on base
    rates, the Wasserstein and Gromov-Wasserstein bounds on impact matrices
    and the bound on the average intensities (the smaller model plays the
    first role). The latent distances d_w(x×) and d_gw(x×) both equal
    √2·d_w(x) exactly.

    Args:
        model1 (HawkesModel): First model, with latent coordinates.
        model2 (HawkesModel): Second model, with latent coordinates.
        lipschitz (LipschitzEstimate): Constants of f and g.
        v_max (int): V_max of the graphon; scales the impact constant.
        rng (np.random.Generator | None): Source for GW restarts.
        gw_restarts (int): Random GW starts.
        gw_iters (int): Proximal steps per GW start.

    Returns:
        PairCheck: Every check with both sides.

    Raises:
        InputError: If a model lacks latent coordinates.

    """
    if model1.latent_x is None or model2.latent_x is None:
        raise InputError("check_pair needs models sampled with latent coordinates")
    if model1.num_types > model2.num_types:
        model1, model2 = model2, model1
    rng = rng if rng is not None else np.random.default_rng(0)
    outcome = PairCheck(sizes=(model1.num_types, model2.num_types))
    checks = outcome.checks

    for name, model in (("stationary_1", model1), ("stationary_2", model2)):
        check = is_stationary(model)
        checks.append(BoundCheck(name, check.spectral_norm, 1.0, strict=True))

    d_x, plan_x = emd_1d_plan(model1.latent_x, model2.latent_x)
    d_mu = emd_1d(model1.mu, model2.mu)
    checks.append(BoundCheck("mu_lower", lipschitz.c1_f * d_x, d_mu))
    checks.append(BoundCheck("mu_upper", d_mu, lipschitz.c2_f * d_x))

    decay_mass = model1.decay_mass
    impact_constant = lipschitz.c_g * max(1.0, 1.0 / (v_max * decay_mass))
    d_pairs = np.sqrt(2.0) * d_x
    d_adjacency = emd_1d(model1.adjacency.ravel(), model2.adjacency.ravel())
    checks.append(BoundCheck("A_w", d_adjacency, impact_constant * d_pairs))
    gw_value, approximate = _gw_upper(
        model1.adjacency, model2.adjacency, plan_x, rng, gw_restarts, gw_iters
    )
    checks.append(
        BoundCheck("A_gw", gw_value, impact_constant * d_pairs, approximate)
    )

    try:
        rates1, rates2 = average_intensity(model1), average_intensity(model2)
    except StationarityError:
        outcome.inestimable.append("intensity")
        return outcome
    small, large = model1.num_types, model2.num_types
    kappa = decay_mass * float(np.linalg.norm(model1.adjacency, 2))
    mu_norm = float(np.linalg.norm(model1.mu))
    rate_norm = float(np.linalg.norm(rates1))
    if kappa >= 1.0 or mu_norm == 0.0 or rate_norm == 0.0:
        outcome.inestimable.append("intensity")
        return outcome
    conditioning = float(
        np.linalg.norm(np.eye(small) - decay_mass * model1.adjacency, 2)
    )
    lhs = emd_1d(rates1, rates2) / rate_norm
    bracket = np.sqrt(2.0 * large) * lipschitz.c_g / (
        lipschitz.c1_f * conditioning
    ) + 1.0 / mu_norm
    padding = np.sqrt((large - small) / small) * mu_norm
    rhs = np.sqrt((large - small) / (large * small)) + bracket / (1.0 - kappa) * (
        d_mu + padding
    )
    checks.append(BoundCheck("intensity", lhs, rhs))
    if small == large:
        equal_rhs = d_mu / (1.0 - kappa) * (
            np.sqrt(2.0 * small) * lipschitz.c_g / (lipschitz.c1_f * conditioning)
            + 1.0 / mu_norm
        )
        checks.append(BoundCheck("intensity_equal_size", lhs, equal_rhs))
    return outcome


@dataclass
class VerificationReport:
    """Aggregated outcome of `verify_properties`."""

    lipschitz: LipschitzEstimate
    pairs: list[PairCheck]

    @property
    def violation_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for pair in self.pairs:
            for check in pair.checks:
                counts.setdefault(check.name, 0)
                if not check.holds:
                    counts[check.name] += 1
        return counts

    @property
    def inestimable(self) -> int:
        return sum(bool(pair.inestimable) for pair in self.pairs)

    @property
    def approximate(self) -> int:
        return sum(
            any(check.approximate for check in pair.checks) for pair in self.pairs
        )

    @property
    def total_violations(self) -> int:
        return sum(self.violation_counts.values())

    def to_dict(self) -> dict:
        return {
            "pairs": len(self.pairs),
            "lipschitz": {
                "c1_f": self.lipschitz.c1_f,
                "c2_f": self.lipschitz.c2_f,
                "c_g": self.lipschitz.c_g,
                "grid_size": self.lipschitz.grid_size,
            },
            "violations": self.violation_counts,
            "total_violations": self.total_violations,
            "inestimable": self.inestimable,
            "approximate": self.approximate,
            "checks": [
                {
                    "sizes": list(pair.sizes),
                    "inestimable": pair.inestimable,
                    "bounds": [
                        {
                            "name": check.name,
                            "lhs": float(check.lhs),
                            "rhs": float(check.rhs),
                            "holds": check.holds,
                            "approximate": check.approximate,
                        }
                        for check in pair.checks
                    ],
                }
                for pair in self.pairs
            ],
        }


def verify_properties(
    params: GraphonParams,
    n_pairs: int,
    rng: np.random.Generator,
    lipschitz: LipschitzEstimate | None = None,
    equal_sizes: bool = False,
    grid_size: int = DEFAULT_LIPSCHITZ_GRID,
    threads: int | None = None,
) -> VerificationReport:
    """Check the guarantees on `n_pairs` model pairs sampled from a graphon.

    Args:
        params (GraphonParams): Graphon parameters.
        n_pairs (int): Number of pairs.
        rng (np.random.Generator): Random source.
        lipschitz (LipschitzEstimate | None): Constants; grid-estimated when
            omitted.
        equal_sizes (bool): Draw both models of a pair with the same size.
        grid_size (int): Grid of the Lipschitz estimate.
        threads (int | None): Worker cap.

    Returns:
        VerificationReport: Per-pair checks and violation counts.

    Raises:
        ConfigurationError: If `n_pairs` < 1.

    """
    if n_pairs < 1:
        raise ConfigurationError(f"n_pairs must be at least 1, got {n_pairs}")
    lipschitz = lipschitz or estimate_lipschitz(params, grid_size)

    def run(stream: np.random.Generator) -> PairCheck:
        size = int(stream.integers(1, params.v_max + 1)) if equal_sizes else None
        first = sample_hp(params, stream, forced_V=size)
        second = sample_hp(params, stream, forced_V=size)
        return check_pair(first, second, lipschitz, v_max=params.v_max, rng=stream)

    report = VerificationReport(
        lipschitz, parallel_map(run, spawn(rng, n_pairs), threads)
    )
    if report.total_violations:
        logger.warning("Bound violations: %s", report.violation_counts)
    logger.info(
        "Verified %d pairs: %d violations, %d inestimable",
        n_pairs,
        report.total_violations,
        report.inestimable,
    )
    return report

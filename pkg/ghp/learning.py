# ghp/learning.py
"""The module implements the learner of graphon parameters.

Every batch pairs B real sequences with B sequences generated from the
current graphon. Generated sequences are weighted by a reward measuring how
close they are to the real batch, either the row maxima of the two-level
transport plan or the original exponential payoff, and θ follows the
weighted likelihood gradient through an Adam step. Rewards are constants
with respect to θ.
"""

import logging
import time
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.special import expit, softmax
from tqdm import tqdm

from .errors import ConfigurationError, InputError
from .evaluation import model_fgw, set_ot_metric
from .graphon import fourier_features, sample_sequences, softplus
from .hawkes import ll_gradient, log_likelihood
from .models import (
    CostMatrix,
    EventSequence,
    GraphonParams,
    HawkesModel,
    LearnMethod,
    TransportPlan,
)
from .schemas import EpochRecord, LearnConfig
from .seeding import (
    STREAM_BATCH,
    STREAM_EVAL,
    STREAM_INIT,
    STREAM_SHUFFLE,
    generator,
    parallel_map,
)
from .transport import hot_distance

logger = logging.getLogger(__name__)


# --- Optimizer ---


class Adam:
    """Adam over a flat parameter vector."""

    def __init__(
        self,
        lr: float = 0.001,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m: np.ndarray | None = None
        self.v: np.ndarray | None = None
        self.t = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """Return θ after one descent step along `grad`."""
        if self.m is None:
            self.m = np.zeros_like(theta)
            self.v = np.zeros_like(theta)
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * (grad * grad)
        step_size = self.lr / (1.0 - self.beta1**self.t)
        denom = np.sqrt(self.v / (1.0 - self.beta2**self.t)) + self.epsilon
        return theta - step_size * self.m / denom


# --- Report ---


@dataclass
class LearnReport:
    """Trajectory and outcome of a training run.

    Attributes:
        epochs (list[EpochRecord]): One record per epoch.
        params (GraphonParams): Final (or best-validation) parameters.
        v_max (int): V_max used for the learned graphon.
        horizon (float): Horizon of generated sequences.
        initial_d_fgw (float | None): Distance of the initial parameters to the
            reference, when one was given.

    """

    epochs: list[EpochRecord]
    params: GraphonParams
    v_max: int
    horizon: float
    initial_d_fgw: float | None = None

    def to_frame(self) -> pd.DataFrame:
        """Report table with columns epoch, loss, mean_reward, d_fgw, seconds.

        A val_d_ot column is appended when validation was tracked.
        """
        columns = ["epoch", "loss", "mean_reward", "d_fgw", "seconds"]
        if any(record.val_d_ot is not None for record in self.epochs):
            columns.append("val_d_ot")
        rows = [record.model_dump() for record in self.epochs]
        return pd.DataFrame(rows, columns=columns)


# --- Rewards and losses ---


def vmax_heuristic(data: Sequence[EventSequence]) -> int:
    """Twice the mean number of distinct event types per sequence, rounded.

    Sequences without events count zero types. The result is at least 1.

    Raises:
        InputError: If the corpus is empty.

    """
    if not data:
        raise InputError("cannot estimate V_max from an empty corpus")
    mean_types = float(np.mean([seq.distinct_types() for seq in data]))
    return max(1, int(round(2.0 * mean_types)))


def hot_weights(plan: TransportPlan) -> np.ndarray:
    """Weight of every generated sequence: the maximum of its row of Q."""
    return plan.matrix.max(axis=1)


def weighted_nll(log_likelihoods: np.ndarray, weights: np.ndarray) -> float:
    """-Σ_k w_k LL_k over the finite log-likelihoods (inf when none is finite)."""
    log_likelihoods = np.asarray(log_likelihoods, dtype=float)
    finite = np.isfinite(log_likelihoods)
    if not finite.any():
        return float("inf")
    return float(-np.sum(weights[finite] * log_likelihoods[finite]))


def raml_hot_loss(
    generated: Sequence[tuple[HawkesModel, EventSequence]],
    real: Sequence[EventSequence],
    Q: TransportPlan,
    log_likelihoods: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Reward-weighted negative log-likelihood of the generated sequences.

    Args:
        generated (Sequence[tuple[HawkesModel, EventSequence]]): K generated
            sequences with the models that produced them.
        real (Sequence[EventSequence]): L real sequences.
        Q (TransportPlan): K×L outer plan.
        log_likelihoods (np.ndarray | None): Precomputed LL_k, if available.

    Returns:
        tuple[float, np.ndarray]: The loss -Σ_k w_k LL_k and the weights
            w_k = max_l Q[k, l]. Sequences with -inf likelihood are left out
            of the sum.

    Raises:
        InputError: If Q does not have shape (K, L).

    """
    if Q.shape != (len(generated), len(real)):
        raise InputError(
            f"plan shape {Q.shape} does not match "
            f"({len(generated)}, {len(real)}) sequences"
        )
    if log_likelihoods is None:
        log_likelihoods = np.array(
            [log_likelihood(model, seq) for model, seq in generated]
        )
    weights = hot_weights(Q)
    return weighted_nll(log_likelihoods, weights), weights


def raml_baseline_weights(cost_matrix, tau: float) -> np.ndarray:
    """Exponential-payoff weights of the original reward-augmented likelihood.

    q(k | l) = exp(-d_kl / τ) / Z_l, normalized over generated k, and the
    weight of k is Σ_l q(k | l).

    Raises:
        ConfigurationError: If τ ≤ 0.

    """
    if not tau > 0:
        raise ConfigurationError(f"tau must be positive, got {tau}")
    values = (
        cost_matrix.values
        if isinstance(cost_matrix, CostMatrix)
        else CostMatrix(np.asarray(cost_matrix)).values
    )
    return softmax(-values / tau, axis=0).sum(axis=1)


# --- Gradients ---


def param_gradient(
    params: GraphonParams,
    models: Sequence[HawkesModel],
    mu_A_grads: Sequence[tuple[np.ndarray, np.ndarray]],
    weights: np.ndarray,
) -> np.ndarray:
    """Gradient over θ of the loss -Σ_k w_k LL_k.

    The Hawkes gradients of each model are chained through
    μ_v = f(x_v) and a_vu = σ(h(x_v, x_u)) / (V_max D), holding the latent
    coordinates and the weights fixed.

    Args:
        params (GraphonParams): Current parameters.
        models (Sequence[HawkesModel]): Models carrying `latent_x`.
        mu_A_grads (Sequence[tuple[np.ndarray, np.ndarray]]): (∂LL/∂μ,
            ∂LL/∂A) per model.
        weights (np.ndarray): Per-model weights.

    Returns:
        np.ndarray: Gradient in the layout of `GraphonParams.to_vector`.

    Raises:
        InputError: If a model lacks latent coordinates or shapes disagree.

    """
    weights = np.asarray(weights, dtype=float)
    if not len(models) == len(mu_A_grads) == weights.size:
        raise InputError(
            f"got {len(models)} models, {len(mu_A_grads)} gradients and "
            f"{weights.size} weights"
        )
    slope = expit(params.f2)
    scale = softplus(params.f1)
    d_scale = expit(params.f1)
    d_slope = slope * (1.0 - slope)
    impact_scale = 1.0 / (params.v_max * params.decay_mass)

    gradient = np.zeros(params.num_parameters)
    for model, (grad_mu, grad_adjacency), weight in zip(
        models, mu_A_grads, weights, strict=True
    ):
        if model.latent_x is None:
            raise InputError("param_gradient needs models sampled with latent_x")
        latent = model.latent_x
        if grad_mu.shape != latent.shape or grad_adjacency.shape != (
            latent.size,
            latent.size,
        ):
            raise InputError("Hawkes gradients do not match the model size")
        if weight == 0.0:
            continue
        growth = np.exp(slope * latent)
        d_f1 = grad_mu @ (d_scale * (growth - 1.0))
        d_f2 = grad_mu @ (scale * latent * d_slope * growth)

        features = fourier_features(params, latent)
        impact = expit(features.logits)
        d_logits = grad_adjacency * impact * (1.0 - impact) * impact_scale
        d_g = np.stack(
            [
                np.einsum("vw,vi,wij->ij", d_logits, features.sin_x, features.right),
                np.einsum("vw,vi,wij->ij", d_logits, features.cos_x, features.right),
                np.einsum("vw,vij,wj->ij", d_logits, features.left, features.sin_y),
                np.einsum("vw,vij,wj->ij", d_logits, features.left, features.cos_y),
            ],
            axis=-1,
        )
        gradient -= weight * np.concatenate([[d_f1, d_f2], d_g.ravel()])
    return gradient


# --- Training ---


@dataclass(frozen=True)
class BatchOutcome:
    """Loss, weights and θ-gradient of one batch."""

    loss: float
    weights: np.ndarray
    gradient: np.ndarray


def batch_step(
    params: GraphonParams,
    real: Sequence[EventSequence],
    config: LearnConfig,
    horizon: float,
    rng: np.random.Generator,
) -> BatchOutcome | None:
    """Generate, weight and differentiate one batch.

    Returns None when every generated sequence has a degenerate likelihood.
    """
    beta = None if config.sinkhorn_beta == "auto" else config.sinkhorn_beta
    generated = sample_sequences(params, len(real), horizon, rng, config.threads)
    result = hot_distance(
        [seq for _, seq in generated], list(real), beta=beta, threads=config.threads
    )
    log_likelihoods = np.array(
        parallel_map(lambda pair: log_likelihood(*pair), generated, config.threads)
    )
    if config.method == LearnMethod.HOT:
        loss, weights = raml_hot_loss(generated, real, result.plan, log_likelihoods)
    else:
        weights = raml_baseline_weights(result.inner_costs, config.raml_tau)
        loss = weighted_nll(log_likelihoods, weights)

    finite = np.flatnonzero(np.isfinite(log_likelihoods))
    if finite.size == 0:
        logger.warning("Skipping batch: every generated sequence is degenerate")
        return None
    kept = [generated[k] for k in finite]
    grads = parallel_map(lambda pair: ll_gradient(*pair), kept, config.threads)
    gradient = param_gradient(
        params, [model for model, _ in kept], grads, weights[finite]
    )
    return BatchOutcome(loss, weights, gradient)


def _f_mask(params: GraphonParams) -> np.ndarray:
    """Ones on the f entries of θ, zeros on the g coefficients."""
    mask = np.zeros(params.num_parameters)
    mask[:2] = 1.0
    return mask


def train(
    data: Sequence[EventSequence],
    config: LearnConfig,
    reference: GraphonParams | None = None,
    validation: Sequence[EventSequence] | None = None,
    progress: bool = True,
) -> LearnReport:
    """Learn graphon parameters from a corpus of event sequences.

    Args:
        data (Sequence[EventSequence]): Training corpus.
        config (LearnConfig): Hyperparameters.
        reference (GraphonParams | None): Ground truth for the per-epoch
            FGW distance.
        validation (Sequence[EventSequence] | None): Held-out sequences; when
            given, the epoch with the lowest validation transport distance
            provides the returned parameters.
        progress (bool): Show a progress bar on stderr.

    Returns:
        LearnReport: Per-epoch records and the learned parameters.

    Raises:
        InputError: If the corpus is empty.

    """
    if not data:
        raise InputError("training corpus is empty")
    v_max = vmax_heuristic(data) if config.v_max == "auto" else int(config.v_max)
    horizon = config.horizon or max(seq.horizon for seq in data)
    params = GraphonParams.random(
        config.order,
        v_max,
        generator(config.seed, STREAM_INIT),
        kernel_rate=config.kernel_rate,
    )
    if not config.learn_g:
        params = params.with_vector(params.to_vector() * _f_mask(params))
    logger.info(
        "Training %s on %d sequences (V_max=%d, S=%d, T=%g)",
        config.method.value,
        len(data),
        v_max,
        config.order,
        horizon,
    )
    initial_d_fgw = (
        model_fgw(params, reference, config.fgw_grid)
        if reference is not None
        else None
    )
    optimizer = Adam(lr=config.learning_rate)
    theta = params.to_vector()
    records: list[EpochRecord] = []
    best_score, best_params = np.inf, params

    for epoch in tqdm(
        range(1, config.epochs + 1), desc="epochs", disable=not progress
    ):
        started = time.perf_counter()
        order = generator(config.seed, STREAM_SHUFFLE, epoch).permutation(len(data))
        losses, rewards = [], []
        for batch, offset in enumerate(range(0, len(data), config.batch_size)):
            real = [data[i] for i in order[offset : offset + config.batch_size]]
            rng = generator(config.seed, STREAM_BATCH, epoch, batch)
            outcome = batch_step(params, real, config, horizon, rng)
            if outcome is None:
                continue
            gradient = outcome.gradient
            if not config.learn_g:
                gradient = gradient * _f_mask(params)
            theta = optimizer.step(theta, gradient)
            params = params.with_vector(theta)
            losses.append(outcome.loss)
            rewards.append(float(outcome.weights.mean()))

        d_fgw = (
            model_fgw(params, reference, config.fgw_grid)
            if reference is not None
            else None
        )
        val_d_ot = None
        if validation:
            val_d_ot = set_ot_metric(
                params,
                list(validation),
                len(validation),
                horizon,
                generator(config.seed, STREAM_EVAL, epoch),
                threads=config.threads,
            )
            if val_d_ot < best_score:
                best_score, best_params = val_d_ot, params
        record = EpochRecord(
            epoch=epoch,
            loss=float(np.mean(losses)) if losses else float("nan"),
            mean_reward=float(np.mean(rewards)) if rewards else float("nan"),
            d_fgw=d_fgw,
            seconds=time.perf_counter() - started,
            val_d_ot=val_d_ot,
        )
        logger.info(
            "epoch %d loss=%.6g reward=%.4g d_fgw=%s",
            epoch,
            record.loss,
            record.mean_reward,
            "-" if d_fgw is None else f"{d_fgw:.6g}",
        )
        records.append(record)

    final = best_params if validation else params
    return LearnReport(
        epochs=records,
        params=final,
        v_max=v_max,
        horizon=horizon,
        initial_d_fgw=initial_d_fgw,
    )

# ghp/schemas.py
"""The module defines the Pydantic schemas for files and run configuration.

These schemas validate what crosses the process boundary: model and
sequence files, learner configuration, reports, alignment output and run
manifests. Domain computations use the types in `ghp.models`.
"""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import DEFAULT_FGW_GRID, DEFAULT_KERNEL_RATE, DEFAULT_ORDER
from .models import LearnMethod

# --- File Schemas ---


class GraphonFile(BaseModel):
    """Schema of a graphon model file.

    Attributes:
        f1 (float): Pre-softplus scale of f.
        f2 (float): Pre-sigmoid exponent of f.
        S (int): Fourier order.
        g_coeffs (list[float]): 4(S+1)² coefficients in row-major (i, j, m)
            order.
        v_max (int): Maximum number of event types.
        kernel_rate (float): Decay rate of the exponential kernel.

    """

    model_config = ConfigDict(extra="forbid")

    f1: float = Field(..., description="Pre-softplus scale of f.")
    f2: float = Field(..., description="Pre-sigmoid exponent of f.")
    S: int = Field(..., ge=0, description="Fourier order of g.")
    g_coeffs: list[float] = Field(
        ..., description="Fourier coefficients of g, row-major (i, j, m)."
    )
    v_max: int = Field(..., ge=1, description="Maximum number of event types.")
    kernel_rate: float = Field(
        DEFAULT_KERNEL_RATE, gt=0, description="Decay rate of the kernel."
    )

    @model_validator(mode="after")
    def check_coefficient_count(self) -> "GraphonFile":
        expected = 4 * (self.S + 1) ** 2
        if len(self.g_coeffs) != expected:
            raise ValueError(
                f"g_coeffs must hold 4(S+1)^2 = {expected} values, "
                f"got {len(self.g_coeffs)}"
            )
        return self


class SequenceRecord(BaseModel):
    """Schema of one line of a sequence file.

    Attributes:
        T (float): Observation horizon.
        events (list[tuple[float, int]]): (time, type) pairs.
        num_types (int): Size of the type universe.

    """

    model_config = ConfigDict(extra="forbid")

    T: float = Field(..., gt=0, description="Observation horizon.")
    events: list[tuple[float, int]] = Field(
        default_factory=list, description="(time, type) pairs."
    )
    num_types: int = Field(..., ge=1, description="Size of the type universe.")

    @model_validator(mode="after")
    def check_events(self) -> "SequenceRecord":
        for position, (time, kind) in enumerate(self.events):
            if not 0.0 <= time <= self.T:
                raise ValueError(f"event {position}: time {time} outside [0, {self.T}]")
            if not 0 <= kind < self.num_types:
                raise ValueError(
                    f"event {position}: type {kind} outside [0, {self.num_types})"
                )
        return self


# --- Learner Schemas ---


class LearnConfig(BaseModel):
    """Hyperparameters of the learner.

    Attributes:
        epochs (int): Passes over the corpus.
        batch_size (int): Real sequences per batch; as many are generated.
        learning_rate (float): Adam step size.
        v_max (int | "auto"): Maximum number of types of the learned graphon.
        sinkhorn_beta (float | "auto"): Outer transport regularization.
        raml_tau (float): Temperature of the exponential payoff baseline.
        horizon (float | None): Horizon of generated sequences; the largest
            training horizon when unset.
        seed (int): Root seed.
        method (LearnMethod): Reward used to weight generated sequences.
        order (int): Fourier order of the learned g.
        kernel_rate (float): Decay rate of the kernel (not learned).
        fgw_grid (int): Grid used for the per-epoch distance to a reference.
        learn_g (bool): Train the g coefficients; when false they stay at zero
            (g ≡ 1/2) and only f1, f2 are fitted.
        threads (int | None): Worker cap.

    """

    epochs: int = Field(20, ge=1, description="Number of epochs.")
    batch_size: int = Field(10, ge=1, description="Batch size B.")
    learning_rate: float = Field(0.01, gt=0, description="Adam learning rate.")
    v_max: int | Literal["auto"] = Field("auto", description="V_max or 'auto'.")
    sinkhorn_beta: float | Literal["auto"] = Field(
        "auto", description="Outer Sinkhorn regularization or 'auto'."
    )
    raml_tau: float = Field(1.0, gt=0, description="Payoff temperature.")
    horizon: float | None = Field(None, gt=0, description="Generated horizon.")
    seed: int = Field(0, description="Root seed.")
    method: LearnMethod = Field(LearnMethod.HOT, description="hot or raml.")
    order: int = Field(DEFAULT_ORDER, ge=0, description="Fourier order S.")
    kernel_rate: float = Field(DEFAULT_KERNEL_RATE, gt=0, description="Kernel rate.")
    fgw_grid: int = Field(DEFAULT_FGW_GRID, ge=2, description="FGW grid size.")
    learn_g: bool = Field(True, description="Train g (false: g frozen at 0).")
    threads: int | None = Field(None, ge=1, description="Worker cap.")

    @field_validator("v_max", mode="before")
    @classmethod
    def parse_v_max(cls, value):
        if isinstance(value, str) and value.strip().isdigit():
            value = int(value)
        if isinstance(value, int) and value < 1:
            raise ValueError("v_max must be at least 1")
        return value

    @field_validator("sinkhorn_beta", mode="before")
    @classmethod
    def parse_beta(cls, value):
        if isinstance(value, str) and value != "auto":
            value = float(value)
        if isinstance(value, int | float) and value <= 0:
            raise ValueError("sinkhorn_beta must be positive")
        return value


class EpochRecord(BaseModel):
    """One row of the learner report."""

    epoch: int
    loss: float
    mean_reward: float
    d_fgw: float | None = None
    seconds: float
    val_d_ot: float | None = None


# --- Output Schemas ---


class DistanceOutput(BaseModel):
    """Output of the `distance` command."""

    d_ot: float
    Q: list[list[float]]
    inner_D: list[list[float]]
    plans: list[list[list[list[float]]]] | None = None


class AlignmentRecord(BaseModel):
    """Alignment of one real event type to a graphon coordinate."""

    sequence: int | None = Field(
        None, description="Test sequence index; null when pooled over sequences."
    )
    type: int = Field(..., description="Real event type.")
    x_star: float | None = Field(..., description="Density argmax, null if unaligned.")
    density: list[float]
    grid: int
    landmarks: int


class RunManifest(BaseModel):
    """Provenance written next to every output file.

    Attributes:
        subcommand (str): Command that produced the output.
        config (dict): Fully resolved options.
        seed (int | None): Root seed.
        version (str): Package version.
        inputs (dict[str, str]): SHA-256 digest of every input file.
        started_at (str): ISO-8601 start time.
        seconds (float): Wall-clock duration.

    """

    subcommand: str
    config: dict
    seed: int | None = None
    version: str
    inputs: dict[str, str] = Field(default_factory=dict)
    started_at: str
    seconds: float


# --- Protocol Schemas ---


class ProtocolConfig(BaseModel):
    """Settings of the synthetic recovery protocol.

    Attributes:
        trials (int): Independent ground-truth draws.
        v_max (int): V_max of the ground truth.
        order (int): Fourier order of truth and learner.
        horizon (float): Observation window [0, horizon].
        n_train (int): Training pool size.
        n_validation (int): Validation set size.
        n_test (int): Test set size.
        train_sizes (list[int]): Training subset sizes to learn from.
        methods (list[LearnMethod]): Learners to compare.
        epochs (int): Epochs per run.
        learning_rate (float): Adam step size.
        batch_size (int): Batch size B.
        fgw_grid (int): Grid of the model distance.
        seed (int): Root seed.
        threads (int | None): Worker cap.

    """

    trials: int = Field(10, ge=1, description="Number of trials.")
    v_max: int = Field(20, ge=1, description="Ground-truth V_max.")
    order: int = Field(DEFAULT_ORDER, ge=0, description="Fourier order S.")
    horizon: float = Field(50.0, gt=0, description="Observation horizon.")
    n_train: int = Field(100, ge=1, description="Training pool size.")
    n_validation: int = Field(10, ge=0, description="Validation set size.")
    n_test: int = Field(10, ge=1, description="Test set size.")
    train_sizes: list[int] = Field(
        default_factory=lambda: [10, 50, 100], description="Training sizes."
    )
    methods: list[LearnMethod] = Field(
        default_factory=lambda: [LearnMethod.HOT, LearnMethod.RAML],
        description="Learners.",
    )
    epochs: int = Field(20, ge=1, description="Epochs per run.")
    learning_rate: float = Field(0.01, gt=0, description="Adam learning rate.")
    batch_size: int = Field(10, ge=1, description="Batch size B.")
    fgw_grid: int = Field(DEFAULT_FGW_GRID, ge=2, description="FGW grid size.")
    seed: int = Field(0, description="Root seed.")
    threads: int | None = Field(None, ge=1, description="Worker cap.")

    @model_validator(mode="after")
    def check_sizes(self) -> "ProtocolConfig":
        for size in self.train_sizes:
            if not 1 <= size <= self.n_train:
                raise ValueError(f"train size {size} outside [1, {self.n_train}]")
        return self


class ProtocolRecord(BaseModel):
    """One row of the protocol table."""

    trial: int
    method: LearnMethod
    train_size: int
    d_fgw: float
    d_ot: float

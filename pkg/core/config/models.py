"""
Validated configuration models.

Every tunable of the region editor, the adapter trainer and the experiment
driver lives here as a frozen pydantic model. Range checks mirror the
invariants of the editing rule and the training protocol, so an invalid value
is rejected when the configuration is built rather than deep inside a run.
"""
import math
from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.config.constants import (
    BATCH_SIZE,
    DEFAULT_ALPHA_EXPAND,
    DEFAULT_BETA,
    DEFAULT_BUFFER_THRESHOLD,
    DEFAULT_DELTA_MIN,
    DEFAULT_DIM,
    DEFAULT_GAMMA,
    DEFAULT_K_ADD,
    DEFAULT_K_REGIONS,
    DEFAULT_LAMBDA_EXPAND,
    DEFAULT_LAMBDA_SEP,
    DEFAULT_R_MAX,
    DEFAULT_STRIDE,
    DEFAULT_TAU,
    DEFAULT_WINDOW_LENGTH,
    EVAL_CUTOFF,
    FINETUNE_EPOCHS,
    GRAD_CLIP,
    KMEANS_MAX_ITER,
    KMEANS_RESTARTS,
    LEARNING_RATE,
    LORA_ALPHA,
    LORA_DROPOUT,
    LORA_RANK,
    MIXING_RATIO,
    RADIUS_QUANTILE,
    RECENCY_DECAY,
    REPAIR_STEP_SIZE,
    REPAIR_STEPS,
    REPLAY_FRACTION,
    SETUP_EPOCHS,
    WEIGHT_DECAY,
)


class OverlapDistanceMode(str, Enum):
    """Center distance used by the separation penalty."""

    ANGULAR = "angular"
    EUCLIDEAN_LITERAL = "euclidean_literal"


class Arm(str, Enum):
    """Comparison arms of an experiment."""

    RAIE = "raie"
    RAIE_NO_EDIT = "raie_no_edit"
    GLOBAL_ADAPTER = "global_adapter"
    REPLAY = "replay"
    FROZEN_BASE = "frozen_base"


class EditConfig(BaseModel):
    """Confidence-gated editing parameters.

    Field order is part of the region snapshot format; do not reorder.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    tau: float = Field(DEFAULT_TAU, ge=0.0, le=1.0)
    delta_min: float = Field(DEFAULT_DELTA_MIN, ge=0.0)
    beta: float = Field(DEFAULT_BETA, ge=0.0, le=1.0)
    gamma: float = Field(DEFAULT_GAMMA, ge=0.0, le=1.0)
    lambda_expand: float = Field(DEFAULT_LAMBDA_EXPAND, gt=0.0)
    alpha_expand: float = Field(DEFAULT_ALPHA_EXPAND, gt=0.0, lt=1.0)
    r_max: float = Field(DEFAULT_R_MAX, gt=0.0, le=math.pi)
    radius_quantile: float = Field(RADIUS_QUANTILE, gt=0.0, le=1.0)
    buffer_threshold: int = Field(DEFAULT_BUFFER_THRESHOLD, ge=1)
    k_add: int = Field(DEFAULT_K_ADD, ge=1)
    lambda_sep: float = Field(DEFAULT_LAMBDA_SEP, ge=0.0)
    overlap_distance_mode: OverlapDistanceMode = OverlapDistanceMode.EUCLIDEAN_LITERAL

    @model_validator(mode="after")
    def _check_buffer(self) -> "EditConfig":
        if self.buffer_threshold < self.k_add:
            raise ValueError(
                f"buffer_threshold ({self.buffer_threshold}) must be >= k_add ({self.k_add})"
            )
        return self


class TrainConfig(BaseModel):
    """Optimisation settings for backbone set-up and adapter training."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    learning_rate: float = Field(LEARNING_RATE, gt=0.0)
    setup_epochs: int = Field(SETUP_EPOCHS, ge=0)
    finetune_epochs: int = Field(FINETUNE_EPOCHS, ge=0)
    batch_size: int = Field(BATCH_SIZE, ge=1)
    mixing_ratio: float = Field(MIXING_RATIO, ge=0.0, le=1.0)
    weight_decay: float = Field(WEIGHT_DECAY, ge=0.0)
    grad_clip: float = Field(GRAD_CLIP, ge=0.0)  # 0 disables clipping
    seed: int = 0


class AdapterConfig(BaseModel):
    """Low-rank adapter shape."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lora_rank: int = Field(LORA_RANK, ge=1)
    lora_alpha: float = Field(LORA_ALPHA, gt=0.0)
    lora_dropout: float = Field(LORA_DROPOUT, ge=0.0, lt=1.0)

    @property
    def scale(self) -> float:
        return self.lora_alpha / self.lora_rank


class ExperimentConfig(BaseModel):
    """Everything a Set-up / Finetune / Test run needs."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    k_regions: int = Field(DEFAULT_K_REGIONS, ge=1)
    window_length: int = Field(DEFAULT_WINDOW_LENGTH, ge=1)
    stride: int = Field(DEFAULT_STRIDE, ge=1)
    dim: int = Field(DEFAULT_DIM, ge=1)
    recency_decay: float = Field(RECENCY_DECAY, gt=0.0, le=1.0)
    kmeans_max_iter: int = Field(KMEANS_MAX_ITER, ge=1)
    kmeans_restarts: int = Field(KMEANS_RESTARTS, ge=1)
    repair_steps: int = Field(REPAIR_STEPS, ge=0)
    repair_step_size: float = Field(REPAIR_STEP_SIZE, gt=0.0)
    eval_cutoff: int = Field(EVAL_CUTOFF, ge=1)
    replay_fraction: float = Field(REPLAY_FRACTION, gt=0.0, le=1.0)
    exclude_seen: bool = False
    arms: Tuple[Arm, ...] = (Arm.RAIE, Arm.GLOBAL_ADAPTER, Arm.REPLAY, Arm.FROZEN_BASE)
    seed: int = 0
    threads: Optional[int] = Field(None, ge=1)
    edit: EditConfig = EditConfig()
    train: TrainConfig = TrainConfig()
    adapter: AdapterConfig = AdapterConfig()

    @field_validator("arms", mode="before")
    @classmethod
    def _split_arms(cls, value):
        if isinstance(value, str):
            value = [part.strip() for part in value.split(",") if part.strip()]
        return value

    @field_validator("arms")
    @classmethod
    def _arms_nonempty(cls, value: Tuple[Arm, ...]) -> Tuple[Arm, ...]:
        if not value:
            raise ValueError("at least one arm is required")
        # Keep first occurrence order, drop repeats
        return tuple(dict.fromkeys(value))

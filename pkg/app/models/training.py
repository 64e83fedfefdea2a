from enum import Enum
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.metrics import MseResult

N_CIRCUIT_PARAMS = 20


class TrainConfig(BaseModel):
    """Hyperparameters of the full quantum GAN."""

    model_config = ConfigDict(frozen=True)

    gen_lr: float = Field(0.02, gt=0)
    disc_lr: float = Field(0.04, gt=0)
    gen_decay: float = Field(0.006, gt=0)
    disc_decay: float = Field(0.007, gt=0)
    epochs: int = Field(1000, ge=1)
    steps_per_epoch: int = Field(8, ge=1)
    batch_size: int = Field(8, ge=1)
    disc_steps_per_gen_step: int = Field(5, ge=1)
    shots: int = Field(1024, ge=1)
    label_true: float = Field(0.9, gt=0, lt=1)
    label_fake: float = Field(0.1, gt=0, lt=1)
    exact_mode: bool = False
    seed: int = 0
    mse_sample_size: int = Field(50, ge=1, description="Generated and training images per epoch MSE")


class HybridConfig(BaseModel):
    """Hyperparameters of the hybrid model (quantum generator, classical discriminator)."""

    model_config = ConfigDict(frozen=True)

    gen_lr: float = Field(0.01, gt=0)
    disc_lr: float = Field(0.006, gt=0)
    joint_decay: float = Field(0.006, gt=0)
    epochs: int = Field(1000, ge=1)
    steps_per_epoch: int = Field(1, ge=1)
    batch_size: int = Field(8, ge=1)
    shots: int = Field(1024, ge=1)
    label_true: float = Field(0.9, gt=0, lt=1)
    label_fake: float = Field(0.1, gt=0, lt=1)
    exact_mode: bool = False
    seed: int = 0
    mse_sample_size: int = Field(50, ge=1)
    adam_beta1: float = Field(0.9, ge=0, lt=1)
    adam_beta2: float = Field(0.999, ge=0, lt=1)
    adam_eps: float = Field(1e-8, gt=0)


class SpsaConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    c0: float = Field(0.1, gt=0, description="Perturbation magnitude")
    gamma: float = Field(0.101, gt=0, lt=1, description="Perturbation decay exponent")
    momentum: float = Field(0.9, ge=0, lt=1, description="Decay of the gradient history used in training; 0 disables it")


class GanParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    gen: Tuple[float, ...] = Field(default=(0.0,) * N_CIRCUIT_PARAMS)
    disc: Tuple[float, ...] = Field(default=(0.0,) * N_CIRCUIT_PARAMS)

    @field_validator("gen", "disc")
    @classmethod
    def check_length(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(v) != N_CIRCUIT_PARAMS:
            raise ValueError(f"expected {N_CIRCUIT_PARAMS} circuit parameters, got {len(v)}")
        return v


class MlpSize(str, Enum):
    S = "S"
    M = "M"
    L = "L"


class MlpSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    layer_widths: Tuple[int, ...]
    leak: float = Field(0.2, ge=0, description="Slope of the hidden leaky rectifier")

    @model_validator(mode="after")
    def check(self) -> "MlpSpec":
        if len(self.layer_widths) < 2 or any(w < 1 for w in self.layer_widths):
            raise ValueError("need at least an input and an output layer of positive width")
        if self.layer_widths[-1] != 1:
            raise ValueError("the output layer has width 1")
        return self

    @property
    def n_params(self) -> int:
        w = self.layer_widths
        return sum(w[i] * w[i + 1] + w[i + 1] for i in range(len(w) - 1))

    @classmethod
    def of_size(cls, size: MlpSize) -> "MlpSpec":
        return cls(layer_widths=MLP_WIDTHS[MlpSize(size)])


MLP_WIDTHS = {
    MlpSize.S: (8, 8, 8, 1),
    MlpSize.M: (8, 16, 16, 1),
    MlpSize.L: (8, 32, 32, 16, 1),
}


class LossRecord(BaseModel):
    epoch: int
    gen: float = Field(..., description="Generator loss")
    disc_true: float = Field(..., description="Discriminator loss on training images")
    disc_fake: float = Field(..., description="Discriminator loss on generated images")

    @property
    def disc_total(self) -> float:
        return self.disc_true + self.disc_fake


class TrainResult(BaseModel):
    """Outcome of one full-qGAN trial."""

    params: GanParams
    losses: List[LossRecord]
    mse_curve: List[MseResult]
    loss_evaluations: int


class HybridResult(BaseModel):
    """Outcome of one hybrid trial."""

    size: MlpSize
    gen: Tuple[float, ...]
    weights: Tuple[float, ...]
    losses: List[LossRecord]
    mse_curve: List[MseResult]
    loss_evaluations: int

"""TrainConfig module."""
from dataclasses import dataclass, field

from entities.checkpoint import Stage
from entities.loss_weights import LossWeights
from network.net_config import NetConfig
from utils.exceptions import ConfigError


@dataclass(frozen=True)
class OptimizerConfig:
    """AdamW with cosine decay and gradient clipping."""

    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    weight_decay: float = 1e-4
    min_lr_ratio: float = 0.1
    grad_clip_norm: float = 1.0

    def __post_init__(self) -> None:
        """Validate ranges."""
        if self.lr <= 0 or not 0 <= self.beta1 < 1 or not 0 <= self.beta2 < 1:
            raise ConfigError(f"Invalid optimizer settings: {self}")
        if self.weight_decay < 0 or not 0 <= self.min_lr_ratio <= 1 or self.grad_clip_norm <= 0:
            raise ConfigError(f"Invalid optimizer settings: {self}")


@dataclass(frozen=True)
class TrainingConfig:
    """Loop settings."""

    steps: int = 10000
    batch_size: int = 4
    patch_size: int = 128
    seed: int = 0
    checkpoint_interval: int = 1000
    log_interval: int = 50
    progress_bar: bool = True
    device: str = "cpu"

    def __post_init__(self) -> None:
        """Validate ranges."""
        if self.steps < 0 or self.batch_size < 1 or self.patch_size < 1:
            raise ConfigError(f"Invalid training settings: {self}")
        if self.checkpoint_interval < 1 or self.log_interval < 1:
            raise ConfigError(f"Intervals must be positive: {self}")


@dataclass(frozen=True)
class TrainConfig:
    """Everything one training stage needs."""

    stage: Stage
    net: NetConfig
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    loss_weights: LossWeights = field(default_factory=LossWeights)

    def __post_init__(self) -> None:
        """Check the network fits the stage."""
        if self.stage is Stage.TEACHER and not self.net.with_text:
            raise ConfigError("The teacher stage trains a text-guided network; set with_text = true")
        if self.stage is Stage.DISTILL and self.net.with_text:
            raise ConfigError("The distillation stage trains a text-free student; set with_text = false")

"""Initer module."""
import logging
from dataclasses import dataclass, field
from pathlib import Path

import init_helpers
from init_helpers import init_logs

from controller import Controller
from datasets.degradations import DegradationConfig
from entities.loss_weights import LossWeights
from entities.train_config import OptimizerConfig, TrainingConfig
from network.net_config import NetConfig
from text_priors.text_prior import TextPrior
from utils.config_parsing import load_config
from utils.seeding import seed_everything

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TeacherNetConfig(NetConfig):
    """Teacher network section defaults."""

    base_channels: int = 48
    with_text: bool = True


@dataclass(frozen=True)
class StudentNetConfig(NetConfig):
    """Student network section defaults."""

    base_channels: int = 16
    with_text: bool = False


@dataclass
class RunConfig:
    """Parsed command plus the config file and overrides it runs with."""

    command: str
    config_path: Path | None = None
    overrides: list[str] = field(default_factory=list)
    out: Path | None = None
    seed: int | None = None

    @property
    def effective_overrides(self) -> list[str]:
        """Overrides with ``--seed`` applied last."""
        if self.seed is None:
            return list(self.overrides)
        return [*self.overrides, f"training.seed={self.seed}"]


@dataclass
class Initer:
    """Init all project components."""

    @dataclass
    class Config:
        """config."""

        logging: init_helpers.LogsConfig
        teacher_net: TeacherNetConfig = field(default_factory=TeacherNetConfig)
        student_net: StudentNetConfig = field(default_factory=StudentNetConfig)
        optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
        training: TrainingConfig = field(default_factory=TrainingConfig)
        loss_weights: LossWeights = field(default_factory=LossWeights)
        text_prior: TextPrior.Config = field(default_factory=TextPrior.Config)
        degradation: DegradationConfig = field(default_factory=DegradationConfig)

        @property
        def teacher(self) -> NetConfig:
            """Teacher layout as a plain NetConfig."""
            return NetConfig.from_dict(self.teacher_net.as_dict())

        @property
        def student(self) -> NetConfig:
            """Student layout as a plain NetConfig."""
            return NetConfig.from_dict(self.student_net.as_dict())

    config: Config

    @dataclass
    class Context:
        """context."""

        text_prior: TextPrior | None = None
        controller: Controller | None = None

    context: Context

    def __init__(self, run_config: RunConfig) -> None:
        """init."""
        self.run_config = run_config
        self.context = self.Context()
        self.config = load_config(self.Config, run_config.config_path, run_config.effective_overrides)
        init_logs(self.config.logging)
        logger.info(f"Config: {self.config}")

    def __enter__(self) -> Controller:
        """enter."""
        seed_everything(self.config.training.seed)
        self.context.text_prior = TextPrior(self.config.text_prior, self.config.teacher.text_dim)
        self.context.controller = Controller(self.config, self.context)
        return self.context.controller

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        """exit."""
        logger.info("----===== Deinit done ====----")

"""Checkpoint module."""
from dataclasses import dataclass, field
from enum import StrEnum, unique
from typing import Any

import numpy as np

from network.net_config import NetConfig

CHECKPOINT_FORMAT_VERSION = 1
PROJECTOR_PREFIX = "projector."
OPTIMIZER_PREFIX = "optimizer."
RNG_TENSOR_NAME = "rng.torch"


@unique
class Stage(StrEnum):
    """Stage."""

    TEACHER = "teacher"
    DISTILL = "distill"


@dataclass
class Checkpoint:
    """Everything needed to rebuild, resume or run a trained network."""

    stage: Stage
    net_config: NetConfig
    step: int
    tensors: dict[str, np.ndarray]
    metadata: dict[str, Any] = field(default_factory=dict)
    format_version: int = CHECKPOINT_FORMAT_VERSION

    def network_tensors(self) -> dict[str, np.ndarray]:
        """Tensors belonging to the fusion network itself."""
        return {
            name: tensor for name, tensor in self.tensors.items()
            if not name.startswith((PROJECTOR_PREFIX, OPTIMIZER_PREFIX)) and name != RNG_TENSOR_NAME
        }

    def prefixed_tensors(self, prefix: str) -> dict[str, np.ndarray]:
        """Tensors under ``prefix`` with the prefix stripped."""
        return {name[len(prefix):]: tensor for name, tensor in self.tensors.items() if name.startswith(prefix)}

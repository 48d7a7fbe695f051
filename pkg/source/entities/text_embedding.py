"""TextEmbedding module."""
from dataclasses import dataclass

import numpy as np
import torch

from utils.exceptions import TextPriorError

DEFAULT_TEXT_DIM = 512


@dataclass(frozen=True)
class TextEmbedding:
    """Fixed-length text vector tagged with the degradation category it describes."""

    vector: np.ndarray
    category: str

    def __post_init__(self) -> None:
        """Validate vector."""
        if not self.category:
            raise TextPriorError("Text embedding category must be nonempty")
        if self.vector.ndim != 1:
            raise TextPriorError(f"Text embedding must be a vector, got shape {self.vector.shape}")
        norm = float(np.linalg.norm(self.vector))
        if not np.isfinite(norm) or norm <= 0.0:
            raise TextPriorError(f"Text embedding for {self.category!r} has invalid norm {norm}")

    @property
    def text_dim(self) -> int:
        """Vector length."""
        return self.vector.shape[0]

    def to_tensor(self, dtype: torch.dtype = torch.float32) -> torch.Tensor:
        """Return the vector as a 1×D tensor."""
        return torch.from_numpy(self.vector.astype(np.float64)).to(dtype).unsqueeze(0)


def stack_embeddings(embeddings: list[TextEmbedding], dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """Stack embeddings into a B×D tensor."""
    return torch.cat([embedding.to_tensor(dtype) for embedding in embeddings], dim=0)

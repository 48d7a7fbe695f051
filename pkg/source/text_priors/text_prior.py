"""TextPrior module."""
import logging
from dataclasses import dataclass

import torch

from entities.loss_weights import LossWeights, WeightTable
from entities.text_embedding import DEFAULT_TEXT_DIM, TextEmbedding, stack_embeddings
from outer_resources.embedding_files import load_embeddings
from outer_resources.weight_table_files import load_weight_table
from text_priors.embedding_providers import (
    AbstractEmbeddingProvider,
    PrecomputedEmbeddingProvider,
    StubEmbeddingProvider,
)
from text_priors.weight_resolver import DEFAULT_WEIGHT_TABLE, resolve_weights

logger = logging.getLogger(__name__)


class TextPrior:
    """Category embeddings plus the category to loss weight policy."""

    @dataclass
    class Config:
        """config."""

        embedding_file: str | None = None
        weight_table_file: str | None = None

    def __init__(self, config: Config, text_dim: int = DEFAULT_TEXT_DIM) -> None:
        """init."""
        self.config = config
        self.provider: AbstractEmbeddingProvider
        if config.embedding_file:
            self.provider = PrecomputedEmbeddingProvider(load_embeddings(config.embedding_file, text_dim), text_dim)
        else:
            self.provider = StubEmbeddingProvider(text_dim)
        self.weight_table: WeightTable = (
            load_weight_table(config.weight_table_file) if config.weight_table_file else DEFAULT_WEIGHT_TABLE
        )
        logger.info(f"{type(self).__name__} inited")

    @property
    def signature(self) -> str:
        """Signature of the embedding provider."""
        return self.provider.signature

    def embed(self, category: str) -> TextEmbedding:
        """Embedding of one category."""
        return self.provider.embed(category)

    def embed_batch(self, categories: list[str], dtype: torch.dtype = torch.float32) -> torch.Tensor:
        """B×D embeddings of a batch's categories."""
        return stack_embeddings([self.embed(category) for category in categories], dtype)

    def weights_for(self, category: str, base: LossWeights) -> LossWeights:
        """Loss weights of a category."""
        return resolve_weights(category, base, self.weight_table)

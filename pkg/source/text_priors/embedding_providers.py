"""Embedding providers module."""
import abc
import hashlib
import logging

import numpy as np

from entities.text_embedding import DEFAULT_TEXT_DIM, TextEmbedding
from utils.exceptions import TextPriorError
from utils.seeding import stable_seed

logger = logging.getLogger(__name__)

STUB_SIGNATURE = "stub"
PRECOMPUTED_SIGNATURE_PREFIX = "precomputed:"


def stub_encode(category: str, text_dim: int = DEFAULT_TEXT_DIM) -> TextEmbedding:
    """Deterministic unit vector for a category.

    The category string is hashed with ``stable_seed`` (SHA-256, first 8 bytes little-endian), the seed drives
    numpy's PCG64 ``default_rng`` which draws ``text_dim`` standard normals, and the draw is L2-normalized.
    """
    if not category:
        raise TextPriorError("Cannot encode an empty category")
    if text_dim < 1:
        raise TextPriorError(f"text_dim must be positive, got {text_dim}")
    vector = np.random.default_rng(stable_seed(category)).standard_normal(text_dim)
    return TextEmbedding(vector=vector / np.linalg.norm(vector), category=category)


class AbstractEmbeddingProvider(abc.ABC):
    """Source of text embeddings for degradation categories."""

    text_dim: int

    @abc.abstractmethod
    def embed(self, category: str) -> TextEmbedding:
        """Get the embedding of a category."""
        pass

    @property
    @abc.abstractmethod
    def signature(self) -> str:
        """Identifies which embeddings the provider returns."""
        pass


class StubEmbeddingProvider(AbstractEmbeddingProvider):
    """Hash-seeded stand-in for a text encoder."""

    def __init__(self, text_dim: int = DEFAULT_TEXT_DIM) -> None:
        """init."""
        self.text_dim = text_dim
        self._cache: dict[str, TextEmbedding] = {}
        logger.info(f"{type(self).__name__} inited")

    def embed(self, category: str) -> TextEmbedding:
        """Get the embedding of a category."""
        if category not in self._cache:
            self._cache[category] = stub_encode(category, self.text_dim)
        return self._cache[category]

    @property
    def signature(self) -> str:
        """signature."""
        return STUB_SIGNATURE


class PrecomputedEmbeddingProvider(AbstractEmbeddingProvider):
    """Embeddings computed offline, e.g. by a CLIP text encoder."""

    def __init__(self, category_to_embedding: dict[str, TextEmbedding], text_dim: int = DEFAULT_TEXT_DIM) -> None:
        """init."""
        for category, embedding in category_to_embedding.items():
            if embedding.text_dim != text_dim:
                raise TextPriorError(f"Embedding {category!r} has dimension {embedding.text_dim}, "
                                     f"expected {text_dim}")
        self.text_dim = text_dim
        self._category_to_embedding = dict(category_to_embedding)
        logger.info(f"{type(self).__name__} inited with {len(self._category_to_embedding)} categories")

    def embed(self, category: str) -> TextEmbedding:
        """Get the embedding of a category."""
        try:
            return self._category_to_embedding[category]
        except KeyError:
            raise TextPriorError(f"No precomputed embedding for {category!r}; known: "
                                 f"{sorted(self._category_to_embedding)}") from None

    @property
    def signature(self) -> str:
        """SHA-256 over the sorted categories and their float64 vectors."""
        digest = hashlib.sha256()
        for category in sorted(self._category_to_embedding):
            digest.update(category.encode("utf-8"))
            digest.update(np.asarray(self._category_to_embedding[category].vector, dtype="<f8").tobytes())
        return f"{PRECOMPUTED_SIGNATURE_PREFIX}{digest.hexdigest()}"

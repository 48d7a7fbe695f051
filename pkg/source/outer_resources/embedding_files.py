"""Embedding file reading and writing.

One record per line: category, a tab, then comma-separated decimal floats. Lines starting with ``#`` and blank
lines are ignored. Floats are written with ``repr`` so a save and load roundtrip is bit exact.
"""
import logging
from pathlib import Path

import numpy as np

from entities.text_embedding import DEFAULT_TEXT_DIM, TextEmbedding
from utils.exceptions import TextPriorError

logger = logging.getLogger(__name__)


def parse_embedding_line(line: str, line_number: int, text_dim: int) -> TextEmbedding:
    """Parse one record."""
    category, separator, values = line.partition("\t")
    if not separator:
        raise TextPriorError(f"Line {line_number}: expected 'category<TAB>values'")
    try:
        vector = np.array([float(value) for value in values.split(",")], dtype=np.float64)
    except ValueError as e:
        raise TextPriorError(f"Line {line_number}: malformed float ({e})") from e
    if vector.shape[0] != text_dim:
        raise TextPriorError(f"Line {line_number}: {category!r} has dimension {vector.shape[0]}, expected {text_dim}")
    return TextEmbedding(vector=vector, category=category.strip())


def load_embeddings(path: str | Path, text_dim: int = DEFAULT_TEXT_DIM) -> dict[str, TextEmbedding]:
    """Read a category to embedding map."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise TextPriorError(f"Cannot read embedding file {path}: {repr(e)}") from e
    category_to_embedding = {}
    for line_number, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        embedding = parse_embedding_line(line, line_number, text_dim)
        if embedding.category in category_to_embedding:
            raise TextPriorError(f"Line {line_number}: duplicate category {embedding.category!r}")
        category_to_embedding[embedding.category] = embedding
    logger.info(f"Loaded {len(category_to_embedding)} embeddings from {path}")
    return category_to_embedding


def save_embeddings(path: str | Path, embeddings: list[TextEmbedding]) -> None:
    """Write embeddings in file order."""
    lines = [
        f"{embedding.category}\t{','.join(repr(float(value)) for value in embedding.vector)}"
        for embedding in embeddings
    ]
    Path(path).write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")

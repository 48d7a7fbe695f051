"""Weight table file reading.

Tab-separated rows ``category f_int f_ssim f_grad f_color delta_ir``; ``#`` lines are comments.
"""
import logging
from pathlib import Path

from entities.loss_weights import WeightFactors, WeightTable
from utils.exceptions import TextPriorError

logger = logging.getLogger(__name__)

WEIGHT_TABLE_COLUMNS = ("category", "f_int", "f_ssim", "f_grad", "f_color", "delta_ir")


def load_weight_table(path: str | Path) -> WeightTable:
    """Read a category to weight factors table."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise TextPriorError(f"Cannot read weight table {path}: {repr(e)}") from e
    category_to_factors = {}
    for line_number, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        cells = line.split("\t")
        if len(cells) != len(WEIGHT_TABLE_COLUMNS):
            raise TextPriorError(f"{path}:{line_number}: expected columns {WEIGHT_TABLE_COLUMNS}, got {cells}")
        try:
            category_to_factors[cells[0].strip()] = WeightFactors(*(float(cell) for cell in cells[1:]))
        except ValueError as e:
            raise TextPriorError(f"{path}:{line_number}: {e}") from e
    logger.info(f"Loaded weight factors for {sorted(category_to_factors)} from {path}")
    return WeightTable(category_to_factors=category_to_factors)

"""Histogram module."""
import numpy as np

from entities.image import Image

HISTOGRAM_BINS = 256


def quantize(values: np.ndarray) -> np.ndarray:
    """Bin index of every value: bin k holds [k/256, (k+1)/256), the last bin is closed."""
    return np.clip(np.floor(np.asarray(values, dtype=np.float64) * HISTOGRAM_BINS), 0, HISTOGRAM_BINS - 1).astype(
        np.int64
    )


def histogram256(image: Image | np.ndarray) -> np.ndarray:
    """256-bin count vector of a grayscale image in [0, 1]."""
    values = image.data if isinstance(image, Image) else np.asarray(image)
    return np.bincount(quantize(values).ravel(), minlength=HISTOGRAM_BINS)

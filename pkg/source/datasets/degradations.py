"""Synthetic degradations.

``noise`` hits the infrared source, every other category the visible one. Outputs always stay in [0, 1].
"""
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from entities.image import Image
from entities.sample_pair import CLEAN_CATEGORY
from utils.exceptions import DatasetError

INFRARED_CATEGORIES = frozenset({"noise"})


@dataclass(frozen=True)
class DegradationConfig:
    """Degradation constants."""

    low_light_gamma: float = 2.2
    low_light_gain: float = 0.35
    contrast_factor: float = 0.4
    noise_sigma: float = 0.06
    blur_size: int = 5
    blur_sigma: float = 1.2


def _low_light(data: np.ndarray, config: DegradationConfig, rng: np.random.Generator) -> np.ndarray:
    """Gamma darkening then gain."""
    return np.power(data, config.low_light_gamma) * config.low_light_gain


def _low_contrast(data: np.ndarray, config: DegradationConfig, rng: np.random.Generator) -> np.ndarray:
    """Linear squeeze toward mid gray."""
    return 0.5 + config.contrast_factor * (data - 0.5)


def _noise(data: np.ndarray, config: DegradationConfig, rng: np.random.Generator) -> np.ndarray:
    """Additive Gaussian noise."""
    return data + rng.normal(0.0, config.noise_sigma, size=data.shape)


def _blur(data: np.ndarray, config: DegradationConfig, rng: np.random.Generator) -> np.ndarray:
    """Spatial Gaussian blur, channels untouched."""
    radius = config.blur_size // 2
    return ndimage.gaussian_filter(
        data, sigma=(config.blur_sigma, config.blur_sigma, 0.0), mode="reflect", radius=(radius, radius, 0),
    )


_DEGRADATIONS = {
    "low_light": _low_light,
    "low_contrast": _low_contrast,
    "noise": _noise,
    "blur": _blur,
}
DEGRADATION_NAMES = tuple(_DEGRADATIONS)


def degrade(image: Image, category: str, seed: int, config: DegradationConfig = DegradationConfig()) -> Image:
    """Apply one degradation; ``clean`` returns the image unchanged."""
    if category == CLEAN_CATEGORY:
        return image
    if category not in _DEGRADATIONS:
        raise DatasetError(f"Unknown degradation {category!r}; known: {', '.join(DEGRADATION_NAMES)}")
    data = image.data.astype(np.float64)
    degraded = _DEGRADATIONS[category](data, config, np.random.default_rng(seed))
    return Image(data=np.clip(degraded, 0.0, 1.0).astype(image.data.dtype), channels=image.channels)


def degrade_pair(vis: Image, ir: Image, category: str, seed: int,
                 config: DegradationConfig = DegradationConfig()) -> tuple[Image, Image]:
    """Degrade whichever source the category targets."""
    if category in INFRARED_CATEGORIES:
        return vis, degrade(ir, category, seed, config)
    return degrade(vis, category, seed, config), ir

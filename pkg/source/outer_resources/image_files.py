"""Image file reading and writing with Pillow.

Pixels are stored as 8-bit values: reading divides by 255, writing multiplies by 255 and rounds half up.
"""
import logging
from pathlib import Path

import numpy as np
from PIL import Image as PilImage, UnidentifiedImageError

from entities.image import ChannelLayout, Image
from imaging.color import BT601_RGB_TO_YCBCR
from utils.exceptions import DatasetError

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")


def load_image(path: str | Path, layout: ChannelLayout) -> Image:
    """Read an image file as RGB3 or GRAY1; color files read as GRAY1 are reduced to BT.601 luma."""
    try:
        with PilImage.open(path) as file:
            file.load()
            mode = "L" if file.mode in ("L", "I;16", "I", "F") and layout is ChannelLayout.GRAY1 else "RGB"
            pixels = np.asarray(file.convert(mode), dtype=np.float64) / 255.0
    except (OSError, UnidentifiedImageError) as e:
        raise DatasetError(f"Cannot read image {path}: {repr(e)}") from e
    if pixels.ndim == 2:
        pixels = pixels[:, :, None]
    if layout is ChannelLayout.GRAY1 and pixels.shape[2] == 3:
        pixels = pixels @ BT601_RGB_TO_YCBCR[0][:, None]
    return Image(data=pixels.astype(np.float32), channels=layout)


def to_uint8(image: Image) -> np.ndarray:
    """Quantize to 8 bits with round-half-up."""
    return np.floor(np.clip(image.data.astype(np.float64), 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def save_image(path: str | Path, image: Image) -> None:
    """Write an image as an 8-bit file, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pixels = to_uint8(image)
    mode = "L" if image.channels is ChannelLayout.GRAY1 else "RGB"
    try:
        PilImage.fromarray(pixels[:, :, 0] if mode == "L" else pixels).save(path)
    except OSError as e:
        raise DatasetError(f"Cannot write image {path}: {repr(e)}") from e

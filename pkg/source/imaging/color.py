"""Color transforms module.

All functions take tensors shaped ``(..., C, H, W)`` and are differentiable. The RGB to YCbCr table is the BT.601
full-range one; the inverse is derived from it so the roundtrip is exact up to float rounding.
"""
import numpy as np
import torch

from utils.exceptions import InvalidChannelError

BT601_RGB_TO_YCBCR = np.array([
    [0.299, 0.587, 0.114],
    [-0.168736, -0.331264, 0.5],
    [0.5, -0.418688, -0.081312],
], dtype=np.float64)
BT601_YCBCR_TO_RGB = np.linalg.inv(BT601_RGB_TO_YCBCR)
CHROMA_OFFSET = np.array([0.0, 0.5, 0.5], dtype=np.float64)


def _check_channels(image: torch.Tensor, expected: int, operation: str) -> None:
    """Raise InvalidChannelError unless the channel axis has ``expected`` entries."""
    if image.ndim < 3 or image.shape[-3] != expected:
        shape = tuple(image.shape)
        raise InvalidChannelError(f"{operation} expects {expected} channels at axis -3, got shape {shape}")


def _apply_matrix(image: torch.Tensor, matrix: np.ndarray) -> torch.Tensor:
    """Multiply every pixel's channel vector by ``matrix``."""
    weights = torch.as_tensor(matrix, dtype=image.dtype, device=image.device)
    return torch.einsum("ij,...jhw->...ihw", weights, image)


def _offset(image: torch.Tensor) -> torch.Tensor:
    """Chroma offset broadcastable over ``image``."""
    return torch.as_tensor(CHROMA_OFFSET, dtype=image.dtype, device=image.device).view(3, 1, 1)


def rgb_to_ycbcr(image: torch.Tensor) -> torch.Tensor:
    """Convert RGB to YCbCr with chroma centred on 0.5."""
    _check_channels(image, 3, "rgb_to_ycbcr")
    return _apply_matrix(image, BT601_RGB_TO_YCBCR) + _offset(image)


def ycbcr_to_rgb(image: torch.Tensor, clamp: bool = True) -> torch.Tensor:
    """Convert YCbCr back to RGB, clamping to [0, 1] unless ``clamp`` is false."""
    _check_channels(image, 3, "ycbcr_to_rgb")
    rgb = _apply_matrix(image - _offset(image), BT601_YCBCR_TO_RGB)
    return rgb.clamp(0.0, 1.0) if clamp else rgb


def luma(image: torch.Tensor) -> torch.Tensor:
    """Y channel of an RGB image; single-channel images are returned as is."""
    if image.ndim >= 3 and image.shape[-3] == 1:
        return image
    _check_channels(image, 3, "luma")
    weights = torch.as_tensor(BT601_RGB_TO_YCBCR[0], dtype=image.dtype, device=image.device).view(3, 1, 1)
    return (image * weights).sum(dim=-3, keepdim=True)


def chroma(image: torch.Tensor) -> torch.Tensor:
    """Cb and Cr channels of an RGB image."""
    return rgb_to_ycbcr(image)[..., 1:, :, :]

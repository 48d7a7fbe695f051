"""Sobel, SSIM and padding primitives."""
import torch
import torch.nn.functional as F

from entities.image import GradientPair
from utils.exceptions import InvalidChannelError, ShapeMismatchError

SOBEL_X = ((-1.0, 0.0, 1.0), (-2.0, 0.0, 2.0), (-1.0, 0.0, 1.0))
SOBEL_Y = ((-1.0, -2.0, -1.0), (0.0, 0.0, 0.0), (1.0, 2.0, 1.0))

SSIM_WINDOW_SIZE = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2


def reflect_pad(image: torch.Tensor, top: int, bottom: int, left: int, right: int) -> torch.Tensor:
    """Mirror-pad the last two axes, repeating the mirror when the pad exceeds the frame.

    Frames of height or width 1 cannot be mirrored and are replicated along that axis instead.
    """
    leading_shape = image.shape[:-2]
    padded = image.reshape(-1, 1, image.shape[-2], image.shape[-1])
    while top or bottom or left or right:
        height, width = padded.shape[-2:]
        if height == 1 or width == 1:
            padded = F.pad(padded, (left, right, top, bottom), mode="replicate")
            break
        step_top, step_bottom = min(top, height - 1), min(bottom, height - 1)
        step_left, step_right = min(left, width - 1), min(right, width - 1)
        padded = F.pad(padded, (step_left, step_right, step_top, step_bottom), mode="reflect")
        top, bottom, left, right = top - step_top, bottom - step_bottom, left - step_left, right - step_right
    return padded.reshape(*leading_shape, padded.shape[-2], padded.shape[-1])


def _depthwise(image: torch.Tensor, kernel: torch.Tensor) -> torch.Tensor:
    """Correlate every channel of a (..., C, H, W) tensor with a k×k kernel, reflect padded, same size."""
    if image.ndim < 3:
        raise ShapeMismatchError(f"Expected (..., C, H, W), got shape {tuple(image.shape)}")
    leading_shape = image.shape[:-3]
    channels, height, width = image.shape[-3:]
    radius = kernel.shape[-1] // 2
    batch = image.reshape(-1, channels, height, width)
    padded = reflect_pad(batch, radius, radius, radius, radius)
    weight = kernel.to(dtype=image.dtype, device=image.device).expand(channels, 1, *kernel.shape[-2:]).contiguous()
    filtered = F.conv2d(padded, weight, groups=channels)
    return filtered.reshape(*leading_shape, channels, height, width)


def sobel(image: torch.Tensor) -> GradientPair:
    """Horizontal and vertical 3×3 Sobel responses of a single-channel image."""
    if image.ndim < 3 or image.shape[-3] != 1:
        raise InvalidChannelError(f"sobel expects a single-channel (..., 1, H, W) tensor, got {tuple(image.shape)}")
    kernel_x = torch.tensor(SOBEL_X).view(1, 1, 3, 3)
    kernel_y = torch.tensor(SOBEL_Y).view(1, 1, 3, 3)
    return GradientPair(gx=_depthwise(image, kernel_x), gy=_depthwise(image, kernel_y))


def gaussian_window(size: int = SSIM_WINDOW_SIZE, sigma: float = SSIM_SIGMA) -> torch.Tensor:
    """Normalized 2-D Gaussian kernel as a 1×1×size×size float64 tensor."""
    coordinates = torch.arange(size, dtype=torch.float64) - (size - 1) / 2
    profile = torch.exp(-coordinates ** 2 / (2 * sigma ** 2))
    profile = profile / profile.sum()
    return torch.outer(profile, profile).view(1, 1, size, size)


def gaussian_blur(image: torch.Tensor, size: int, sigma: float) -> torch.Tensor:
    """Reflect-padded Gaussian blur of every channel."""
    return _depthwise(image, gaussian_window(size, sigma))


def ssim_map(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Per-pixel SSIM of two equally shaped (..., C, H, W) tensors in the [0, 1] range."""
    if a.shape != b.shape:
        raise ShapeMismatchError(f"ssim operands differ in shape: {tuple(a.shape)} vs {tuple(b.shape)}")
    window = gaussian_window()
    mu_a = _depthwise(a, window)
    mu_b = _depthwise(b, window)
    sigma_a = _depthwise(a * a, window) - mu_a * mu_a
    sigma_b = _depthwise(b * b, window) - mu_b * mu_b
    sigma_ab = _depthwise(a * b, window) - mu_a * mu_b
    numerator = (2 * mu_a * mu_b + SSIM_C1) * (2 * sigma_ab + SSIM_C2)
    denominator = (mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (sigma_a + sigma_b + SSIM_C2)
    return numerator / denominator


def ssim(a: torch.Tensor, b: torch.Tensor, reduction: str = "mean") -> torch.Tensor:
    """Mean SSIM; ``reduction="none"`` keeps one value per leading index."""
    values = ssim_map(a, b)
    if reduction == "mean":
        return values.mean()
    if reduction == "none":
        return values.flatten(start_dim=-3).mean(dim=-1)
    raise ValueError(f"Unknown reduction {reduction!r}")


"""Image module."""
from dataclasses import dataclass
from enum import StrEnum, unique

import numpy as np
import torch

from utils.exceptions import InvalidChannelError, ShapeMismatchError


@unique
class ChannelLayout(StrEnum):
    """ChannelLayout."""

    RGB3 = "rgb3"
    GRAY1 = "gray1"

    @property
    def channel_count(self) -> int:
        """Number of channels of the layout."""
        return 3 if self is ChannelLayout.RGB3 else 1

    @classmethod
    def from_channel_count(cls, channel_count: int) -> "ChannelLayout":
        """Pick the layout for a channel count."""
        if channel_count == 3:
            return cls.RGB3
        if channel_count == 1:
            return cls.GRAY1
        raise InvalidChannelError(f"Images have 1 or 3 channels, got {channel_count}")


@dataclass(frozen=True)
class Image:
    """H×W×C float image, nominally in [0, 1]."""

    data: np.ndarray
    channels: ChannelLayout

    def __post_init__(self) -> None:
        """Validate layout."""
        if self.data.ndim != 3:
            raise ShapeMismatchError(f"Image data must be H×W×C, got shape {self.data.shape}")
        height, width, channel_count = self.data.shape
        if height < 1 or width < 1:
            raise ShapeMismatchError(f"Image must be at least 1×1, got {height}×{width}")
        if channel_count != self.channels.channel_count:
            raise InvalidChannelError(f"{self.channels} image needs {self.channels.channel_count} channels, "
                                      f"got {channel_count}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("Image values must be finite")

    @classmethod
    def from_array(cls, data: np.ndarray) -> "Image":
        """Wrap an H×W or H×W×C array."""
        data = np.asarray(data)
        if data.ndim == 2:
            data = data[:, :, None]
        return cls(data=data, channels=ChannelLayout.from_channel_count(data.shape[2]))

    @classmethod
    def from_tensor(cls, tensor: torch.Tensor) -> "Image":
        """Wrap a C×H×W or 1×C×H×W tensor."""
        if tensor.ndim == 4:
            if tensor.shape[0] != 1:
                raise ShapeMismatchError(f"Expected a single image, got batch of {tensor.shape[0]}")
            tensor = tensor[0]
        array = tensor.detach().cpu().permute(1, 2, 0).numpy()
        return cls.from_array(np.ascontiguousarray(array))

    @property
    def height(self) -> int:
        """Height in pixels."""
        return self.data.shape[0]

    @property
    def width(self) -> int:
        """Width in pixels."""
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        """Spatial shape."""
        return self.data.shape[0], self.data.shape[1]

    def to_tensor(self, dtype: torch.dtype = torch.float32) -> torch.Tensor:
        """Return a 1×C×H×W tensor copy."""
        return torch.from_numpy(np.ascontiguousarray(self.data.transpose(2, 0, 1))).to(dtype).unsqueeze(0)

    def clamped(self) -> "Image":
        """Return a copy clamped to [0, 1]."""
        return Image(data=np.clip(self.data, 0.0, 1.0), channels=self.channels)


@dataclass(frozen=True)
class GradientPair:
    """Horizontal and vertical gradients with the source's spatial shape."""

    gx: torch.Tensor
    gy: torch.Tensor

    def magnitude(self) -> torch.Tensor:
        """Euclidean gradient strength."""
        return torch.sqrt(self.gx ** 2 + self.gy ** 2)

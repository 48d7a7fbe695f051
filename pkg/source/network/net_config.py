"""NetConfig module."""
from dataclasses import dataclass, replace
from enum import StrEnum, unique

from entities.text_embedding import DEFAULT_TEXT_DIM
from utils.exceptions import ConfigError

LEVELS = 4
DOWNSAMPLE_FACTOR = 2 ** (LEVELS - 1)


@unique
class FusionMode(StrEnum):
    """How the two streams are merged at every level."""

    SCFM = "scfm"
    CONCAT = "concat"
    UNLEARNABLE_WEIGHT = "unlearnable_weight"
    DYNAMIC_WEIGHT = "dynamic_weight"
    MULTISCALE = "multiscale"


@dataclass(frozen=True)
class NetConfig:
    """Width, depth and attention layout of a fusion network."""

    base_channels: int = 48
    levels: int = LEVELS
    depths: tuple[int, ...] = (2, 2, 2, 4)
    heads: tuple[int, ...] = (1, 2, 4, 8)
    window: int = 8
    text_dim: int = DEFAULT_TEXT_DIM
    with_text: bool = True
    fusion_mode: FusionMode = FusionMode.SCFM

    def __post_init__(self) -> None:
        """Validate layout."""
        if self.levels != LEVELS:
            raise ConfigError(f"Only {LEVELS} levels are supported, got {self.levels}")
        if len(self.depths) != self.levels or len(self.heads) != self.levels:
            raise ConfigError(f"depths and heads need {self.levels} entries, got {self.depths} and {self.heads}")
        if self.base_channels < 1 or self.window < 1 or self.text_dim < 1:
            raise ConfigError(f"base_channels, window and text_dim must be positive: {self}")
        if any(depth < 0 for depth in self.depths) or any(head < 1 for head in self.heads):
            raise ConfigError(f"Depths must be nonnegative and heads positive: {self.depths}, {self.heads}")
        for level, heads in enumerate(self.heads):
            if self.channels_at(level) % heads:
                raise ConfigError(f"Level {level + 1} width {self.channels_at(level)} is not divisible by "
                                  f"{heads} heads")

    def channels_at(self, level: int) -> int:
        """Feature width of a 0-based level."""
        return self.base_channels * 2 ** level

    @property
    def pad_multiple(self) -> int:
        """Inputs are padded to multiples of this size so every level holds whole windows."""
        return DOWNSAMPLE_FACTOR * self.window

    @classmethod
    def teacher(cls, **overrides) -> "NetConfig":
        """Text-guided 48-channel preset."""
        return replace(cls(base_channels=48, with_text=True), **overrides)

    @classmethod
    def student(cls, **overrides) -> "NetConfig":
        """Text-free 16-channel preset."""
        return replace(cls(base_channels=16, with_text=False), **overrides)

    def as_dict(self) -> dict:
        """Plain representation for checkpoint metadata."""
        return {
            "base_channels": self.base_channels,
            "levels": self.levels,
            "depths": list(self.depths),
            "heads": list(self.heads),
            "window": self.window,
            "text_dim": self.text_dim,
            "with_text": self.with_text,
            "fusion_mode": str(self.fusion_mode),
        }

    @classmethod
    def from_dict(cls, values: dict) -> "NetConfig":
        """Inverse of :meth:`as_dict`."""
        try:
            return cls(
                base_channels=int(values["base_channels"]),
                levels=int(values["levels"]),
                depths=tuple(int(depth) for depth in values["depths"]),
                heads=tuple(int(head) for head in values["heads"]),
                window=int(values["window"]),
                text_dim=int(values["text_dim"]),
                with_text=bool(values["with_text"]),
                fusion_mode=FusionMode(values.get("fusion_mode", FusionMode.SCFM)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Malformed network config {values}: {repr(e)}") from e

"""Fusion network module."""
import logging
from dataclasses import dataclass

import torch
from torch import nn

from imaging.filters import reflect_pad
from network.attention import block_stack
from network.fusion_modules import (
    ConcatFusion,
    DynamicWeightedFusion,
    MultiscaleFusion,
    SpatialChannelCrossFusion,
    TextModulation,
    UnlearnableWeightedFusion,
    text_modulate,
)
from network.net_config import FusionMode, NetConfig
from utils.exceptions import ConfigError, InvalidChannelError, ShapeMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PadInfo:
    """Reflect padding added at the bottom and right of the inputs."""

    bottom: int
    right: int

    def unpad(self, tensor: torch.Tensor) -> torch.Tensor:
        """Crop the padding back off a (..., H, W) tensor."""
        height, width = tensor.shape[-2:]
        return tensor[..., :height - self.bottom, :width - self.right]


def pad_to_multiple(tensor: torch.Tensor, multiple: int) -> tuple[torch.Tensor, PadInfo]:
    """Reflect-pad the bottom and right of a (..., H, W) tensor up to multiples of ``multiple``."""
    height, width = tensor.shape[-2:]
    pad = PadInfo(bottom=-height % multiple, right=-width % multiple)
    return reflect_pad(tensor, 0, pad.bottom, 0, pad.right), pad


@dataclass
class FeaturePyramid:
    """Per-level encoder features, shallowest level first."""

    vis: list[torch.Tensor]
    ir: list[torch.Tensor]
    fused: list[torch.Tensor]
    modulated: list[torch.Tensor] | None = None
    pad: PadInfo | None = None

    @property
    def decoder_inputs(self) -> list[torch.Tensor]:
        """Features the decoder consumes: modulated when present, fused otherwise."""
        return self.modulated if self.modulated is not None else self.fused


class FusionNetwork(nn.Module):
    """Dual-stream hierarchical encoder, per-level cross fusion, optional text modulation and refining decoder."""

    def __init__(self, config: NetConfig) -> None:
        """init."""
        super().__init__()
        self.config = config
        base = config.base_channels
        levels = range(config.levels)

        self.vis_embed = nn.Conv2d(3, base, kernel_size=3, padding=1, bias=False)
        self.ir_embed = nn.Conv2d(1, base, kernel_size=3, padding=1, bias=False)

        self.vis_encoder = nn.ModuleList(self._blocks(level) for level in levels)
        self.ir_encoder = nn.ModuleList(self._blocks(level) for level in levels)
        self.fusions = nn.ModuleList(self._fusion(level) for level in levels)
        self.modulations = nn.ModuleList(
            TextModulation(config.text_dim, config.channels_at(level)) for level in levels
        ) if config.with_text else None
        self.vis_downsamplers = nn.ModuleList(self._downsampler(level) for level in levels[:-1])
        self.ir_downsamplers = nn.ModuleList(self._downsampler(level) for level in levels[:-1])

        self.upsamplers = nn.ModuleList(
            nn.Sequential(
                nn.Conv2d(config.channels_at(level + 1), config.channels_at(level) * 4, kernel_size=3, padding=1,
                          bias=False),
                nn.PixelShuffle(2),
            )
            for level in levels[:-1]
        )
        self.reducers = nn.ModuleList(
            nn.Conv2d(config.channels_at(level) * 2, config.channels_at(level), kernel_size=1, bias=False)
            for level in levels[:-1]
        )
        self.decoder = nn.ModuleList(self._blocks(level) for level in levels[:-1])
        self.refinement = self._blocks(0)
        self.output = nn.Conv2d(base, 3, kernel_size=3, padding=1)

    def _blocks(self, level: int) -> nn.Sequential:
        """Block stack of a level."""
        return block_stack(self.config.depths[level], self.config.channels_at(level), self.config.heads[level],
                           self.config.window)

    def _fusion(self, level: int) -> nn.Module:
        """Fusion module of a level."""
        channels = self.config.channels_at(level)
        match self.config.fusion_mode:
            case FusionMode.CONCAT:
                return ConcatFusion(channels)
            case FusionMode.UNLEARNABLE_WEIGHT:
                return UnlearnableWeightedFusion()
            case FusionMode.DYNAMIC_WEIGHT:
                return DynamicWeightedFusion(channels)
            case FusionMode.MULTISCALE:
                return MultiscaleFusion(channels)
        return SpatialChannelCrossFusion(channels, self.config.heads[level], self.config.window)

    def _downsampler(self, level: int) -> nn.Conv2d:
        """Stride-2 convolution doubling the width of a level."""
        channels = self.config.channels_at(level)
        return nn.Conv2d(channels, channels * 2, kernel_size=3, stride=2, padding=1, bias=False)

    def patch_embed(self, vis: torch.Tensor, ir: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Embed padded B×3×H×W visible and B×1×H×W infrared inputs to base_channels each."""
        return self.vis_embed(vis), self.ir_embed(ir)

    def modulate(self, level: int, features: torch.Tensor, text: torch.Tensor) -> torch.Tensor:
        """Apply the level's text modulation to fused features."""
        if self.modulations is None:
            raise ConfigError("Text modulation requested from a network built without text")
        gamma, beta = self.modulations[level](text)
        return text_modulate(features, gamma, beta)

    def encode(self, vis: torch.Tensor, ir: torch.Tensor, text: torch.Tensor | None = None) -> FeaturePyramid:
        """Run both encoder streams over padded inputs and fuse them at every level."""
        f_vis, f_ir = self.patch_embed(vis, ir)
        pyramid = FeaturePyramid(vis=[], ir=[], fused=[], modulated=[] if self.config.with_text else None)
        for level in range(self.config.levels):
            if level:
                f_vis = self.vis_downsamplers[level - 1](f_vis)
                f_ir = self.ir_downsamplers[level - 1](f_ir)
            f_vis = self.vis_encoder[level](f_vis)
            f_ir = self.ir_encoder[level](f_ir)
            fused = self.fusions[level](f_vis, f_ir)
            pyramid.vis.append(f_vis)
            pyramid.ir.append(f_ir)
            pyramid.fused.append(fused)
            if pyramid.modulated is not None:
                pyramid.modulated.append(self.modulate(level, fused, text))
        return pyramid

    def decode(self, pyramid: FeaturePyramid) -> torch.Tensor:
        """Upsample from the deepest level through the skip levels, refine and project to RGB."""
        skips = pyramid.decoder_inputs
        features = skips[-1]
        for level in reversed(range(self.config.levels - 1)):
            features = self.upsamplers[level](features)
            features = self.reducers[level](torch.cat([features, skips[level]], dim=1))
            features = self.decoder[level](features)
        return self.output(self.refinement(features))

    def forward(
            self,
            vis: torch.Tensor,
            ir: torch.Tensor,
            text: torch.Tensor | None = None,
    ) -> tuple[torch.Tensor, FeaturePyramid]:
        """Fuse B×3×H×W visible and B×1×H×W infrared batches; ``text`` is B×D and used only with text.

        Inputs are reflect padded to the network's multiple and the output is cropped back. The output is
        clamped to [0, 1] in eval mode only.
        """
        if vis.ndim != 4 or vis.shape[1] != 3 or ir.ndim != 4 or ir.shape[1] != 1:
            raise InvalidChannelError(f"Expected B×3×H×W visible and B×1×H×W infrared batches, "
                                      f"got {tuple(vis.shape)} and {tuple(ir.shape)}")
        if vis.shape[0] != ir.shape[0] or vis.shape[-2:] != ir.shape[-2:]:
            raise ShapeMismatchError(f"Visible {tuple(vis.shape)} and infrared {tuple(ir.shape)} do not match")
        if self.config.with_text:
            if text is None:
                raise ConfigError("This network is text-guided and needs a text embedding")
            if text.shape != (vis.shape[0], self.config.text_dim):
                raise ShapeMismatchError(f"Text batch must be {vis.shape[0]}×{self.config.text_dim}, "
                                         f"got {tuple(text.shape)}")
        else:
            text = None

        vis, pad = pad_to_multiple(vis, self.config.pad_multiple)
        ir, _ = pad_to_multiple(ir, self.config.pad_multiple)
        pyramid = self.encode(vis, ir, text)
        pyramid.pad = pad
        fused = pad.unpad(self.decode(pyramid))
        if not self.training:
            fused = fused.clamp(0.0, 1.0)
        return fused, pyramid


def count_params(config: NetConfig) -> int:
    """Exact number of learnable scalars of a network built from ``config``."""
    with torch.device("meta"):
        network = FusionNetwork(config)
    return sum(parameter.numel() for parameter in network.parameters() if parameter.requires_grad)

"""Cross-modal fusion and text modulation modules."""
import torch
from torch import nn

from network.attention import ChannelSelfAttentionBlock, SpatialSelfAttentionBlock
from utils.exceptions import ShapeMismatchError


def _check_pair(f_vis: torch.Tensor, f_ir: torch.Tensor) -> None:
    """Raise ShapeMismatchError unless both stream features share a shape."""
    if f_vis.shape != f_ir.shape:
        raise ShapeMismatchError(f"Stream features differ in shape: {tuple(f_vis.shape)} vs {tuple(f_ir.shape)}")


class SpatialChannelCrossFusion(nn.Module):
    """Mix spatial attention of one stream with channel attention of the other, in both directions."""

    def __init__(self, channels: int, heads: int, window: int) -> None:
        """init."""
        super().__init__()
        self.ssab_vis = SpatialSelfAttentionBlock(channels, heads, window)
        self.tsab_ir = ChannelSelfAttentionBlock(channels, heads)
        self.ssab_ir = SpatialSelfAttentionBlock(channels, heads, window)
        self.tsab_vis = ChannelSelfAttentionBlock(channels, heads)
        self.merge_vis = nn.Conv2d(channels * 2, channels, kernel_size=1)
        self.merge_ir = nn.Conv2d(channels * 2, channels, kernel_size=1)

    def forward(self, f_vis: torch.Tensor, f_ir: torch.Tensor) -> torch.Tensor:
        """Return merge_vis(SSAB(vis), TSAB(ir)) + merge_ir(SSAB(ir), TSAB(vis))."""
        _check_pair(f_vis, f_ir)
        fused_vis = self.merge_vis(torch.cat([self.ssab_vis(f_vis), self.tsab_ir(f_ir)], dim=1))
        fused_ir = self.merge_ir(torch.cat([self.ssab_ir(f_ir), self.tsab_vis(f_vis)], dim=1))
        return fused_vis + fused_ir


class ConcatFusion(nn.Module):
    """Concatenation followed by a 1×1 convolution."""

    def __init__(self, channels: int) -> None:
        """init."""
        super().__init__()
        self.merge = nn.Conv2d(channels * 2, channels, kernel_size=1)

    def forward(self, f_vis: torch.Tensor, f_ir: torch.Tensor) -> torch.Tensor:
        """forward."""
        _check_pair(f_vis, f_ir)
        return self.merge(torch.cat([f_vis, f_ir], dim=1))


class UnlearnableWeightedFusion(nn.Module):
    """Per-pixel softmax over the mean absolute activation of each stream; no learnable parameters."""

    def forward(self, f_vis: torch.Tensor, f_ir: torch.Tensor) -> torch.Tensor:
        """forward."""
        _check_pair(f_vis, f_ir)
        activity = torch.stack([f_vis.abs().mean(dim=1), f_ir.abs().mean(dim=1)], dim=1)
        weights = activity.softmax(dim=1)
        return weights[:, :1] * f_vis + weights[:, 1:] * f_ir


class DynamicWeightedFusion(nn.Module):
    """A 3×3 convolution predicts per-pixel softmax weights applied to both streams."""

    def __init__(self, channels: int) -> None:
        """init."""
        super().__init__()
        self.weights = nn.Conv2d(channels * 2, 2, kernel_size=3, padding=1)

    def forward(self, f_vis: torch.Tensor, f_ir: torch.Tensor) -> torch.Tensor:
        """forward."""
        _check_pair(f_vis, f_ir)
        weights = self.weights(torch.cat([f_vis, f_ir], dim=1)).softmax(dim=1)
        return weights[:, :1] * f_vis + weights[:, 1:] * f_ir


class MultiscaleFusion(nn.Module):
    """Parallel 1×1, 3×3 and 5×5 convolutions of the concatenated streams, merged by a 1×1 convolution."""

    KERNEL_SIZES = (1, 3, 5)

    def __init__(self, channels: int) -> None:
        """init."""
        super().__init__()
        self.branches = nn.ModuleList(
            nn.Conv2d(channels * 2, channels, kernel_size=size, padding=size // 2) for size in self.KERNEL_SIZES
        )
        self.merge = nn.Conv2d(channels * len(self.KERNEL_SIZES), channels, kernel_size=1)

    def forward(self, f_vis: torch.Tensor, f_ir: torch.Tensor) -> torch.Tensor:
        """forward."""
        _check_pair(f_vis, f_ir)
        stacked = torch.cat([f_vis, f_ir], dim=1)
        return self.merge(torch.cat([branch(stacked) for branch in self.branches], dim=1))


class TextModulation(nn.Module):
    """Two-layer perceptron producing per-channel (gamma, beta) from a text embedding.

    The output layer starts at zero so an untrained modulation is the identity.
    """

    def __init__(self, text_dim: int, channels: int) -> None:
        """init."""
        super().__init__()
        self.channels = channels
        self.hidden = nn.Linear(text_dim, channels)
        self.activation = nn.GELU()
        self.output = nn.Linear(channels, channels * 2)
        nn.init.zeros_(self.output.weight)
        nn.init.zeros_(self.output.bias)

    def forward(self, text: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Map B×D embeddings to (gamma, beta), each B×C."""
        gamma, beta = self.output(self.activation(self.hidden(text))).chunk(2, dim=-1)
        return gamma, beta


def text_modulate(features: torch.Tensor, gamma: torch.Tensor, beta: torch.Tensor) -> torch.Tensor:
    """(1 + gamma) ⊙ F + beta, broadcast over spatial positions."""
    if gamma.shape[-1] != features.shape[1] or beta.shape[-1] != features.shape[1]:
        raise ShapeMismatchError(f"Modulation width {gamma.shape[-1]}/{beta.shape[-1]} does not match "
                                 f"{features.shape[1]} feature channels")
    return (1 + gamma[..., None, None]) * features + beta[..., None, None]

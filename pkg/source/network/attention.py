"""Spatial and channel self-attention blocks.

Both blocks follow ``F + LN(MHA(F))`` with no feed-forward sub-layer and work on B×C×H×W tensors.
"""
import logging

import torch
import torch.nn.functional as F
from einops import rearrange
from torch import nn

from utils.exceptions import ShapeMismatchError

logger = logging.getLogger(__name__)


def relative_position_index(window: int) -> torch.Tensor:
    """Index into a (2w-1)² bias table for every pair of positions of a w×w window."""
    coords = torch.stack(torch.meshgrid(torch.arange(window), torch.arange(window), indexing="ij")).flatten(1)
    relative = (coords[:, :, None] - coords[:, None, :]).permute(1, 2, 0) + (window - 1)
    return relative[:, :, 0] * (2 * window - 1) + relative[:, :, 1]


class WindowSelfAttention(nn.Module):
    """Multi-head self-attention inside non-overlapping w×w windows, with a relative position bias."""

    def __init__(self, channels: int, heads: int, window: int) -> None:
        """init."""
        super().__init__()
        if channels % heads:
            raise ShapeMismatchError(f"{channels} channels cannot be split into {heads} heads")
        self.channels = channels
        self.heads = heads
        self.window = window
        self.scale = (channels // heads) ** -0.5

        self.qkv = nn.Linear(channels, channels * 3)
        self.proj = nn.Linear(channels, channels)
        self.softmax = nn.Softmax(dim=-1)
        self.relative_position_bias_table = nn.Parameter(torch.zeros((2 * window - 1) ** 2, heads))
        self.register_buffer("relative_position_index", relative_position_index(window), persistent=False)
        nn.init.trunc_normal_(self.relative_position_bias_table, std=0.02)

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        """Attend within windows given as (B·nW, w², C) tokens."""
        windows, positions, channels = tokens.shape
        q, k, v = rearrange(self.qkv(tokens), "b n (three h d) -> three b h n d", three=3, h=self.heads)
        attention = (q * self.scale) @ k.transpose(-2, -1)
        bias = self.relative_position_bias_table[self.relative_position_index.reshape(-1)]
        attention = attention + bias.reshape(positions, positions, self.heads).permute(2, 0, 1).unsqueeze(0)
        attention = self.softmax(attention)
        out = rearrange(attention @ v, "b h n d -> b n (h d)")
        return self.proj(out)


class SpatialSelfAttentionBlock(nn.Module):
    """SSAB: window attention over pixel positions, layer norm, residual."""

    def __init__(self, channels: int, heads: int, window: int) -> None:
        """init."""
        super().__init__()
        self.window = window
        self.attention = WindowSelfAttention(channels, heads, window)
        self.norm = nn.LayerNorm(channels)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        """forward."""
        height, width = features.shape[-2:]
        if height % self.window or width % self.window:
            raise ShapeMismatchError(f"Feature size {height}×{width} is not divisible by window {self.window}")
        tokens = rearrange(features, "b c (nh wh) (nw ww) -> (b nh nw) (wh ww) c", wh=self.window, ww=self.window)
        tokens = self.norm(self.attention(tokens))
        update = rearrange(
            tokens, "(b nh nw) (wh ww) c -> b c (nh wh) (nw ww)",
            nh=height // self.window, nw=width // self.window, wh=self.window,
        )
        return features + update


class TransposedSelfAttention(nn.Module):
    """Attention across channels: a C×C map per head from L2-normalized channel descriptors."""

    def __init__(self, channels: int, heads: int) -> None:
        """init."""
        super().__init__()
        if channels % heads:
            raise ShapeMismatchError(f"{channels} channels cannot be split into {heads} heads")
        self.heads = heads
        self.temperature = nn.Parameter(torch.ones(heads, 1, 1))
        self.qkv = nn.Conv2d(channels, channels * 3, kernel_size=1, bias=False)
        self.qkv_dwconv = nn.Conv2d(channels * 3, channels * 3, kernel_size=3, padding=1, groups=channels * 3,
                                    bias=False)
        self.project_out = nn.Conv2d(channels, channels, kernel_size=1, bias=False)
        self.softmax = nn.Softmax(dim=-1)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        """forward."""
        height, width = features.shape[-2:]
        q, k, v = self.qkv_dwconv(self.qkv(features)).chunk(3, dim=1)
        q, k, v = (rearrange(item, "b (h c) y x -> b h c (y x)", h=self.heads) for item in (q, k, v))
        q = F.normalize(q, dim=-1)
        k = F.normalize(k, dim=-1)
        attention = self.softmax((q @ k.transpose(-2, -1)) * self.temperature)
        out = rearrange(attention @ v, "b h c (y x) -> b (h c) y x", y=height, x=width)
        return self.project_out(out)


class ChannelSelfAttentionBlock(nn.Module):
    """TSAB: transposed attention over channels, layer norm across channels, residual."""

    def __init__(self, channels: int, heads: int) -> None:
        """init."""
        super().__init__()
        self.attention = TransposedSelfAttention(channels, heads)
        self.norm = nn.LayerNorm(channels)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        """forward."""
        update = self.attention(features)
        update = self.norm(update.permute(0, 2, 3, 1)).permute(0, 3, 1, 2)
        return features + update


class SpatialChannelBlock(nn.Sequential):
    """One transformer stage: SSAB followed by TSAB."""

    def __init__(self, channels: int, heads: int, window: int) -> None:
        """init."""
        super().__init__(
            SpatialSelfAttentionBlock(channels, heads, window),
            ChannelSelfAttentionBlock(channels, heads),
        )


def block_stack(depth: int, channels: int, heads: int, window: int) -> nn.Sequential:
    """``depth`` SpatialChannelBlocks in sequence (identity when depth is 0)."""
    return nn.Sequential(*(SpatialChannelBlock(channels, heads, window) for _ in range(depth)))

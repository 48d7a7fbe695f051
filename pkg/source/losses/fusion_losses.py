"""Fusion losses module.

Intensity, structure and gradient terms compare luma; the color term compares chroma. Every term accepts
``(..., C, H, W)`` tensors and keeps one value per leading index so batches can mix degradation categories.
"""
from collections.abc import Sequence

import torch

from entities.loss_weights import LossWeights
from imaging.color import chroma, luma
from imaging.filters import sobel, ssim
from utils.exceptions import InvalidChannelError, ShapeMismatchError

FUSION_TERMS = ("l_int", "l_ssim", "l_grad", "l_color")


def _check_shapes(fused: torch.Tensor, *references: torch.Tensor) -> None:
    """Raise ShapeMismatchError unless references match the fused spatial and leading shape."""
    for reference in references:
        if reference.shape[:-3] != fused.shape[:-3] or reference.shape[-2:] != fused.shape[-2:]:
            raise ShapeMismatchError(f"Loss operands differ in shape: {tuple(fused.shape)} vs {tuple(reference.shape)}")


def _per_sample_mean(values: torch.Tensor) -> torch.Tensor:
    """Mean over the trailing C×H×W axes."""
    return values.flatten(start_dim=-3).mean(dim=-1)


def l_int(fused: torch.Tensor, vis_g: torch.Tensor, ir_g: torch.Tensor) -> torch.Tensor:
    """Mean |Y_f - max(Y_vis, Y_ir)| per sample."""
    _check_shapes(fused, vis_g, ir_g)
    target = torch.maximum(luma(vis_g), luma(ir_g))
    return _per_sample_mean(torch.abs(luma(fused) - target))


def l_ssim(
        fused: torch.Tensor,
        vis_g: torch.Tensor,
        ir_g: torch.Tensor,
        delta_ir: float | torch.Tensor = 1.0,
) -> torch.Tensor:
    """(1 - SSIM(Y_f, Y_vis)) + delta_ir · (1 - SSIM(Y_f, Y_ir)) per sample."""
    _check_shapes(fused, vis_g, ir_g)
    fused_luma = luma(fused)
    vis_term = 1 - ssim(fused_luma, luma(vis_g), reduction="none")
    ir_term = 1 - ssim(fused_luma, luma(ir_g), reduction="none")
    return vis_term + delta_ir * ir_term


def l_grad(fused: torch.Tensor, vis_g: torch.Tensor, ir_g: torch.Tensor) -> torch.Tensor:
    """Sum over Sobel directions of mean ||∇Y_f| - max(|∇Y_vis|, |∇Y_ir|)| per sample."""
    _check_shapes(fused, vis_g, ir_g)
    fused_gradients = sobel(luma(fused))
    vis_gradients = sobel(luma(vis_g))
    ir_gradients = sobel(luma(ir_g))
    total = 0
    for direction in ("gx", "gy"):
        vis_strength = torch.abs(getattr(vis_gradients, direction))
        target = torch.maximum(vis_strength, torch.abs(getattr(ir_gradients, direction)))
        total = total + _per_sample_mean(torch.abs(torch.abs(getattr(fused_gradients, direction)) - target))
    return total


def l_color(fused: torch.Tensor, vis_g: torch.Tensor) -> torch.Tensor:
    """Per-pixel L1 distance of the (Cb, Cr) pairs, averaged over pixels."""
    if fused.shape[-3] != 3 or vis_g.shape[-3] != 3:
        raise InvalidChannelError(f"l_color needs RGB operands, got {tuple(fused.shape)} and {tuple(vis_g.shape)}")
    _check_shapes(fused, vis_g)
    difference = torch.abs(chroma(fused) - chroma(vis_g)).sum(dim=-3)
    return difference.flatten(start_dim=-2).mean(dim=-1)


def _weight_values(weights: LossWeights | Sequence[LossWeights], name: str, like: torch.Tensor) -> torch.Tensor:
    """One coefficient per sample, shaped like a per-sample loss."""
    if isinstance(weights, LossWeights):
        return torch.full_like(like, getattr(weights, name))
    if len(weights) != like.numel():
        raise ShapeMismatchError(f"Got {len(weights)} weight sets for {like.numel()} samples")
    values = [getattr(weight, name) for weight in weights]
    return torch.tensor(values, dtype=like.dtype, device=like.device).reshape(like.shape)


def fusion_loss_terms(
        fused: torch.Tensor,
        vis_g: torch.Tensor,
        ir_g: torch.Tensor,
        weights: LossWeights | Sequence[LossWeights] = LossWeights(),
) -> dict[str, torch.Tensor]:
    """Per-sample unweighted terms; ``weights`` only supplies delta_ir."""
    int_term = l_int(fused, vis_g, ir_g)
    delta_ir = _weight_values(weights, "delta_ir", int_term)
    return {
        "l_int": int_term,
        "l_ssim": l_ssim(fused, vis_g, ir_g, delta_ir),
        "l_grad": l_grad(fused, vis_g, ir_g),
        "l_color": l_color(fused, vis_g),
    }


def weighted_total(terms: dict[str, torch.Tensor], weights: LossWeights | Sequence[LossWeights]) -> torch.Tensor:
    """Batch mean of the lambda-weighted sum of per-sample terms."""
    total = 0
    for name in FUSION_TERMS:
        coefficient = _weight_values(weights, name.replace("l_", "lambda_"), terms[name])
        total = total + coefficient * terms[name]
    return total.mean()


def teacher_loss(
        fused: torch.Tensor,
        vis_g: torch.Tensor,
        ir_g: torch.Tensor,
        weights: LossWeights | Sequence[LossWeights] = LossWeights(),
) -> torch.Tensor:
    """lambda_int·L_int + lambda_ssim·L_ssim + lambda_grad·L_grad + lambda_color·L_color, batch mean."""
    return weighted_total(fusion_loss_terms(fused, vis_g, ir_g, weights), weights)

"""Distillation losses module."""
import torch
from torch import nn

from network.fusion_network import FeaturePyramid
from network.net_config import NetConfig
from utils.exceptions import ConfigError, ShapeMismatchError


class DownProjector(nn.Module):
    """Per-level 1×1 projections from teacher feature widths to student widths."""

    def __init__(self, teacher_config: NetConfig, student_config: NetConfig) -> None:
        """init."""
        super().__init__()
        if teacher_config.levels != student_config.levels:
            raise ConfigError(f"Teacher has {teacher_config.levels} levels, student {student_config.levels}")
        if teacher_config.window != student_config.window:
            raise ConfigError(f"Teacher window {teacher_config.window} differs from student window "
                              f"{student_config.window}; pyramids would not align")
        self.projections = nn.ModuleList(
            nn.Conv2d(teacher_config.channels_at(level), student_config.channels_at(level), kernel_size=1, bias=False)
            for level in range(teacher_config.levels)
        )

    def forward(self, features: list[torch.Tensor]) -> list[torch.Tensor]:
        """Project every level."""
        return [projection(level) for projection, level in zip(self.projections, features)]


def l_feat(teacher_pyramid: FeaturePyramid, student_pyramid: FeaturePyramid, projector: DownProjector) -> torch.Tensor:
    """Sum over levels of mean |Down(F_t) - F_s| on pre-modulation fused features."""
    if len(teacher_pyramid.fused) != len(student_pyramid.fused):
        raise ShapeMismatchError(f"Pyramids hold {len(teacher_pyramid.fused)} and {len(student_pyramid.fused)} levels")
    total = 0
    for level, (projected, student) in enumerate(zip(projector(teacher_pyramid.fused), student_pyramid.fused)):
        if projected.shape != student.shape:
            raise ShapeMismatchError(f"Level {level + 1} features differ: projected teacher {tuple(projected.shape)} "
                                     f"vs student {tuple(student.shape)}")
        total = total + torch.abs(projected - student).mean()
    return total


def l_res(fused_teacher: torch.Tensor, fused_student: torch.Tensor) -> torch.Tensor:
    """Mean absolute difference over all pixels and channels."""
    if fused_teacher.shape != fused_student.shape:
        raise ShapeMismatchError(f"Outputs differ in shape: {tuple(fused_teacher.shape)} vs "
                                 f"{tuple(fused_student.shape)}")
    return torch.abs(fused_teacher - fused_student).mean()


def distill_loss(
        base: torch.Tensor | float,
        feat: torch.Tensor | float,
        res: torch.Tensor | float,
        alpha: tuple[float, ...],
) -> torch.Tensor | float:
    """alpha_1·L_base + alpha_2·L_feat + alpha_3·L_res."""
    alpha_base, alpha_feat, alpha_res = alpha
    return alpha_base * base + alpha_feat * feat + alpha_res * res

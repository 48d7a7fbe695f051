"""DistillationTrainer module."""
import logging

import torch
from torch import nn

from datasets.patch_sampler import TrainingBatch
from entities.checkpoint import PROJECTOR_PREFIX, Checkpoint, Stage
from entities.sample_pair import Manifest
from entities.train_config import TrainConfig
from losses.distillation_losses import DownProjector, distill_loss, l_feat, l_res
from losses.fusion_losses import FUSION_TERMS, fusion_loss_terms, weighted_total
from trainers.abstract_stage_trainer import AbstractStageTrainer
from trainers.fusion_runner import check_text_prior, network_from_checkpoint
from utils.exceptions import ConfigError

logger = logging.getLogger(__name__)


class DistillationTrainer(AbstractStageTrainer):
    """Stage two: a text-free student mimics the frozen teacher's features and outputs."""

    stage = Stage.DISTILL

    def __init__(self, config: TrainConfig, context: AbstractStageTrainer.Context, teacher: Checkpoint) -> None:
        """init."""
        if teacher.stage is not Stage.TEACHER:
            raise ConfigError(f"Distillation needs a teacher checkpoint, got a {teacher.stage} one")
        check_text_prior(teacher, context.text_prior)
        super().__init__(config, context)
        self.teacher_config = teacher.net_config
        self.projector = DownProjector(teacher.net_config, config.net).to(self.device)
        self.teacher = network_from_checkpoint(teacher).to(self.device)
        self.teacher.requires_grad_(False)
        logger.info(f"{type(self).__name__} inited")

    def trainable_modules(self) -> dict[str, nn.Module]:
        """Student network and feature projector."""
        return {"": self.network, PROJECTOR_PREFIX: self.projector}

    def checkpoint_metadata(self) -> dict:
        """Teacher layout."""
        return {"teacher_net_config": self.teacher_config.as_dict()}

    def compute_loss(self, batch: TrainingBatch) -> tuple[torch.Tensor, dict[str, float]]:
        """alpha-weighted base, feature and output losses; base uses the fixed configured weights."""
        self.teacher.eval()
        with torch.no_grad():
            text = self.context.text_prior.embed_batch(batch.categories).to(self.device)
            teacher_fused, teacher_pyramid = self.teacher(batch.vis, batch.ir, text)
        student_fused, student_pyramid = self.network(batch.vis, batch.ir)

        weights = self.config.loss_weights
        terms = fusion_loss_terms(student_fused, batch.vis_guid, batch.ir_guid, weights)
        base = weighted_total(terms, weights)
        feat = l_feat(teacher_pyramid, student_pyramid, self.projector)
        res = l_res(teacher_fused, student_fused)
        total = distill_loss(base, feat, res, weights.alpha)

        components = {name: float(terms[name].detach().mean()) for name in FUSION_TERMS}
        components.update(l_feat=float(feat.detach()), l_res=float(res.detach()))
        return total, components


def distill_student(config: TrainConfig, teacher: Checkpoint, manifest: Manifest,
                    context: AbstractStageTrainer.Context, resume_from: Checkpoint | None = None) -> Checkpoint:
    """Distill a student from a teacher checkpoint and return the student's final checkpoint."""
    trainer = DistillationTrainer(config, context, teacher)
    if resume_from is not None:
        trainer.resume(resume_from)
    return trainer.train(manifest)

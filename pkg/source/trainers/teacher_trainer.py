"""TeacherTrainer module."""
import logging

import torch
from torch import nn

from datasets.patch_sampler import TrainingBatch
from entities.checkpoint import Checkpoint, Stage
from entities.sample_pair import Manifest
from entities.train_config import TrainConfig
from losses.fusion_losses import FUSION_TERMS, fusion_loss_terms, weighted_total
from trainers.abstract_stage_trainer import AbstractStageTrainer
from trainers.fusion_runner import TEXT_PRIOR_METADATA_KEY

logger = logging.getLogger(__name__)


class TeacherTrainer(AbstractStageTrainer):
    """Stage one: the text-guided network with category-dependent loss weights."""

    stage = Stage.TEACHER

    def __init__(self, config: TrainConfig, context: AbstractStageTrainer.Context) -> None:
        """init."""
        super().__init__(config, context)
        logger.info(f"{type(self).__name__} inited")

    def trainable_modules(self) -> dict[str, nn.Module]:
        """The network only."""
        return {"": self.network}

    def checkpoint_metadata(self) -> dict:
        """Embedding provider the network was conditioned on."""
        return {TEXT_PRIOR_METADATA_KEY: self.context.text_prior.signature}

    def compute_loss(self, batch: TrainingBatch) -> tuple[torch.Tensor, dict[str, float]]:
        """Teacher loss with weights resolved per sample from its category."""
        text_prior = self.context.text_prior
        weights = [text_prior.weights_for(category, self.config.loss_weights) for category in batch.categories]
        text = text_prior.embed_batch(batch.categories).to(self.device)
        fused, _ = self.network(batch.vis, batch.ir, text)
        terms = fusion_loss_terms(fused, batch.vis_guid, batch.ir_guid, weights)
        total = weighted_total(terms, weights)
        return total, {name: float(terms[name].detach().mean()) for name in FUSION_TERMS}


def train_teacher(config: TrainConfig, manifest: Manifest, context: AbstractStageTrainer.Context,
                  resume_from: Checkpoint | None = None) -> Checkpoint:
    """Train the teacher and return its final checkpoint."""
    trainer = TeacherTrainer(config, context)
    if resume_from is not None:
        trainer.resume(resume_from)
    return trainer.train(manifest)

"""AbstractStageTrainer module."""
import abc
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn
from tqdm import tqdm

from datasets.dataset_scanner import load_sample
from datasets.patch_sampler import TrainingBatch, draw_batch
from entities.checkpoint import OPTIMIZER_PREFIX, RNG_TENSOR_NAME, Checkpoint, Stage
from entities.sample_pair import Manifest, SamplePair
from entities.train_config import TrainConfig
from network.fusion_network import FusionNetwork
from outer_resources.checkpoint_files import apply_tensors, module_tensors, save_checkpoint
from outer_resources.report_files import TrainingLog
from text_priors.text_prior import TextPrior
from utils.exceptions import CheckpointFormatError, DatasetError, NumericalFailure

logger = logging.getLogger(__name__)

TRAINING_LOG_FILE_NAME = "training_log.csv"
NAN_DUMP_FILE_NAME = "nan_dump.json"


def optimizer_tensors(optimizer: torch.optim.Optimizer) -> tuple[dict[str, np.ndarray], list[dict]]:
    """Flatten optimizer moments into named arrays plus JSON-able param groups."""
    state = optimizer.state_dict()
    tensors = {}
    for index, parameter_state in state["state"].items():
        for key, value in parameter_state.items():
            tensors[f"{OPTIMIZER_PREFIX}{index}.{key}"] = torch.as_tensor(value).detach().cpu().float().numpy()
    return tensors, json.loads(json.dumps(state["param_groups"]))


def restore_optimizer(optimizer: torch.optim.Optimizer, tensors: dict[str, np.ndarray], param_groups: list) -> None:
    """Inverse of :func:`optimizer_tensors`; ``tensors`` carry the prefix already stripped."""
    state: dict[int, dict[str, torch.Tensor]] = {}
    for name, array in tensors.items():
        index, _, key = name.partition(".")
        state.setdefault(int(index), {})[key] = torch.from_numpy(array.copy())
    optimizer.load_state_dict({"state": state, "param_groups": param_groups})


class AbstractStageTrainer(abc.ABC):
    """Shared training loop: seeded batches, AdamW, cosine decay, clipping, logging and checkpoints."""

    @dataclass
    class Context:
        """context."""

        text_prior: TextPrior
        run_dir: Path

    stage: Stage

    def __init__(self, config: TrainConfig, context: Context) -> None:
        """init."""
        self.config = config
        self.context = context
        self.device = torch.device(config.training.device)
        self.start_step = 0
        self.network = FusionNetwork(config.net).to(self.device)
        self._optimizer: torch.optim.Optimizer | None = None
        self._scheduler: torch.optim.lr_scheduler.LRScheduler | None = None
        self.log: TrainingLog | None = None

    @abc.abstractmethod
    def trainable_modules(self) -> dict[str, nn.Module]:
        """Modules updated by this stage, keyed by checkpoint prefix."""
        pass

    @abc.abstractmethod
    def compute_loss(self, batch: TrainingBatch) -> tuple[torch.Tensor, dict[str, float]]:
        """Total loss of a batch and its logged components."""
        pass

    def checkpoint_metadata(self) -> dict:
        """Stage-specific metadata stored with every checkpoint."""
        return {}

    @property
    def optimizer(self) -> torch.optim.Optimizer:
        """AdamW over every trainable module, built on first use."""
        if self._optimizer is None:
            parameters = [
                parameter for module in self.trainable_modules().values() for parameter in module.parameters()
            ]
            settings = self.config.optimizer
            self._optimizer = torch.optim.AdamW(
                parameters, lr=settings.lr, betas=(settings.beta1, settings.beta2), weight_decay=settings.weight_decay,
            )
            self._scheduler = torch.optim.lr_scheduler.CosineAnnealingLR(
                self._optimizer, T_max=max(self.config.training.steps, 1), eta_min=settings.lr * settings.min_lr_ratio,
            )
        return self._optimizer

    @property
    def scheduler(self) -> torch.optim.lr_scheduler.LRScheduler:
        """Cosine learning rate decay."""
        _ = self.optimizer
        return self._scheduler

    def load_pairs(self, manifest: Manifest) -> list[SamplePair]:
        """Read every sample of the manifest."""
        if not len(manifest):
            raise DatasetError("Training manifest is empty")
        return [load_sample(record) for record in manifest.records]

    def resume(self, checkpoint: Checkpoint) -> None:
        """Restore weights, optimizer, scheduler and RNG from a checkpoint of this stage."""
        if checkpoint.stage is not self.stage:
            raise CheckpointFormatError(f"Cannot resume {self.stage} training from a {checkpoint.stage} checkpoint")
        if checkpoint.net_config != self.config.net:
            raise CheckpointFormatError(f"Checkpoint network {checkpoint.net_config} differs from {self.config.net}")
        for prefix, module in self.trainable_modules().items():
            tensors = checkpoint.prefixed_tensors(prefix) if prefix else checkpoint.network_tensors()
            apply_tensors(module, tensors)
        optimizer_state = checkpoint.prefixed_tensors(OPTIMIZER_PREFIX)
        if optimizer_state:
            restore_optimizer(self.optimizer, optimizer_state, checkpoint.metadata["optimizer_param_groups"])
        if "scheduler" in checkpoint.metadata:
            self.scheduler.load_state_dict(checkpoint.metadata["scheduler"])
        if RNG_TENSOR_NAME in checkpoint.tensors:
            torch.set_rng_state(torch.from_numpy(checkpoint.tensors[RNG_TENSOR_NAME].copy()))
        self.start_step = checkpoint.step
        logger.info(f"Resuming {self.stage} training at step {self.start_step}")

    def make_checkpoint(self, step: int) -> Checkpoint:
        """Snapshot of the trainable modules, optimizer, scheduler and RNG."""
        tensors = {}
        for prefix, module in self.trainable_modules().items():
            tensors.update(module_tensors(module, prefix))
        moments, param_groups = optimizer_tensors(self.optimizer)
        tensors.update(moments)
        tensors[RNG_TENSOR_NAME] = torch.get_rng_state().numpy().copy()
        metadata = {
            "optimizer_param_groups": param_groups,
            "scheduler": json.loads(json.dumps(self.scheduler.state_dict())),
            "seed": self.config.training.seed,
            **self.checkpoint_metadata(),
        }
        return Checkpoint(stage=self.stage, net_config=self.config.net, step=step, tensors=tensors, metadata=metadata)

    def _dump_non_finite(self, step: int, batch: TrainingBatch, components: dict[str, float]) -> None:
        """Write the offending batch to the run directory and raise."""
        dump_path = self.context.run_dir / NAN_DUMP_FILE_NAME
        dump_path.write_text(json.dumps({
            "stage": str(self.stage), "step": step, "ids": batch.ids, "categories": batch.categories,
            "components": {name: repr(value) for name, value in components.items()},
        }, indent=2), encoding="utf-8")
        raise NumericalFailure(f"Non-finite {self.stage} loss at step {step} on samples {batch.ids}; "
                               f"details in {dump_path}")

    def _to_device(self, batch: TrainingBatch) -> TrainingBatch:
        """Move batch tensors to the training device."""
        return TrainingBatch(
            vis=batch.vis.to(self.device), ir=batch.ir.to(self.device), vis_guid=batch.vis_guid.to(self.device),
            ir_guid=batch.ir_guid.to(self.device), categories=batch.categories, ids=batch.ids,
        )

    def train(self, manifest: Manifest) -> Checkpoint:
        """Run the remaining steps and return the final checkpoint."""
        settings = self.config.training
        self.context.run_dir.mkdir(parents=True, exist_ok=True)
        pairs = self.load_pairs(manifest)
        self.log = TrainingLog(self.context.run_dir / TRAINING_LOG_FILE_NAME, append=self.start_step > 0)
        for module in self.trainable_modules().values():
            module.train()
        parameters = [parameter for group in self.optimizer.param_groups for parameter in group["params"]]

        steps = tqdm(range(self.start_step, settings.steps), desc=str(self.stage), disable=not settings.progress_bar,
                     initial=self.start_step, total=settings.steps)
        for step in steps:
            batch = self._to_device(draw_batch(pairs, settings.batch_size, settings.patch_size, settings.seed, step))
            total, components = self.compute_loss(batch)
            components["total"] = float(total.detach())
            if not all(math.isfinite(value) for value in components.values()):
                self._dump_non_finite(step, batch, components)

            self.optimizer.zero_grad(set_to_none=True)
            total.backward()
            torch.nn.utils.clip_grad_norm_(parameters, self.config.optimizer.grad_clip_norm)
            self.optimizer.step()
            lr = self.optimizer.param_groups[0]["lr"]
            self.scheduler.step()

            self.log.append(step + 1, str(self.stage), components, lr)
            if (step + 1) % settings.log_interval == 0 or step == self.start_step:
                breakdown = ", ".join(f"{name}={value:.5f}" for name, value in components.items())
                logger.info(f"{self.stage} step {step + 1}/{settings.steps}: {breakdown}")
                steps.set_postfix(total=f"{components['total']:.4f}")
            if (step + 1) % settings.checkpoint_interval == 0 and step + 1 < settings.steps:
                periodic_path = self.context.run_dir / f"{self.stage}_step{step + 1:06d}.ckpt"
                save_checkpoint(self.make_checkpoint(step + 1), periodic_path)

        checkpoint = self.make_checkpoint(max(settings.steps, self.start_step))
        save_checkpoint(checkpoint, self.context.run_dir / f"{self.stage}.ckpt")
        return checkpoint

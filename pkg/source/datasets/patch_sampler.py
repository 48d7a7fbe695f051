"""Patch sampling and batch drawing."""
from dataclasses import dataclass

import numpy as np
import torch

from entities.image import Image
from entities.sample_pair import SamplePair
from utils.seeding import stable_seed


def _pad_to(image: Image, size: int) -> Image:
    """Reflect-pad bottom and right so both sides reach ``size``."""
    pad_bottom = max(size - image.height, 0)
    pad_right = max(size - image.width, 0)
    if not pad_bottom and not pad_right:
        return image
    data = np.pad(image.data, ((0, pad_bottom), (0, pad_right), (0, 0)), mode="reflect")
    return Image(data=data, channels=image.channels)


def _crop(image: Image, top: int, left: int, size: int) -> Image:
    """Square crop."""
    return Image(data=image.data[top:top + size, left:left + size].copy(), channels=image.channels)


def sample_patch(pair: SamplePair, size: int, seed: int) -> SamplePair:
    """Crop the same random ``size``×``size`` window out of all four images; small images are padded first."""
    images = [_pad_to(image, size) for image in (pair.vis, pair.ir, pair.vis_guid, pair.ir_guid)]
    height, width = images[0].shape
    rng = np.random.default_rng(seed)
    top = int(rng.integers(0, height - size + 1))
    left = int(rng.integers(0, width - size + 1))
    vis, ir, vis_guid, ir_guid = (_crop(image, top, left, size) for image in images)
    return SamplePair(vis=vis, ir=ir, vis_guid=vis_guid, ir_guid=ir_guid, category=pair.category, id=pair.id)


@dataclass
class TrainingBatch:
    """B×C×H×W tensors of a batch of aligned patches."""

    vis: torch.Tensor
    ir: torch.Tensor
    vis_guid: torch.Tensor
    ir_guid: torch.Tensor
    categories: list[str]
    ids: list[str]

    @classmethod
    def from_pairs(cls, pairs: list[SamplePair], dtype: torch.dtype = torch.float32) -> "TrainingBatch":
        """Stack sample pairs."""
        return cls(
            vis=torch.cat([pair.vis.to_tensor(dtype) for pair in pairs]),
            ir=torch.cat([pair.ir.to_tensor(dtype) for pair in pairs]),
            vis_guid=torch.cat([pair.vis_guid.to_tensor(dtype) for pair in pairs]),
            ir_guid=torch.cat([pair.ir_guid.to_tensor(dtype) for pair in pairs]),
            categories=[pair.category for pair in pairs],
            ids=[pair.id for pair in pairs],
        )


def draw_batch(pairs: list[SamplePair], batch_size: int, patch_size: int, seed: int, step: int) -> TrainingBatch:
    """Batch of random patches, a pure function of (seed, step) so resumed runs see the same data."""
    rng = np.random.default_rng(stable_seed("batch", seed, step))
    indices = rng.integers(0, len(pairs), size=batch_size)
    patch_seeds = rng.integers(0, 2 ** 63, size=batch_size)
    return TrainingBatch.from_pairs([
        sample_patch(pairs[index], patch_size, int(patch_seed)) for index, patch_seed in zip(indices, patch_seeds)
    ])

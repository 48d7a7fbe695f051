"""Synthetic degraded dataset generation.

Clean pairs come from an existing dataset or from procedural scenes: gradient backgrounds with random rectangles
and discs whose visible colors and thermal intensities are drawn independently, plus a faint texture so every
region carries gradients. Every (pair, category) combination becomes one record with clean guidance images.
"""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from datasets.dataset_scanner import LABELS_FILE_NAME, load_sample, open_dataset
from datasets.degradations import DegradationConfig, degrade_pair
from entities.image import Image
from entities.sample_pair import Manifest, ManifestRecord
from outer_resources.image_files import save_image
from outer_resources.manifest_files import MANIFEST_FILE_NAME, save_manifest
from utils.exceptions import DatasetError
from utils.seeding import stable_seed

logger = logging.getLogger(__name__)

DEFAULT_SCENE_SIZE = 128


@dataclass(frozen=True)
class CleanPair:
    """Undegraded visible and infrared images."""

    id: str
    vis: Image
    ir: Image


def make_scene(rng: np.random.Generator, size: int = DEFAULT_SCENE_SIZE) -> tuple[Image, Image]:
    """Procedural visible (RGB) and infrared (gray) scene of ``size``×``size`` pixels."""
    y, x = np.mgrid[0:size, 0:size] / max(size - 1, 1)
    start_color, end_color = rng.uniform(0.15, 0.85, size=(2, 3))
    direction = rng.uniform(0.0, 1.0)
    ramp = direction * x + (1 - direction) * y
    vis = start_color[None, None, :] * (1 - ramp[..., None]) + end_color[None, None, :] * ramp[..., None]
    ir = rng.uniform(0.1, 0.3) + rng.uniform(0.0, 0.2) * (1 - y)

    for _ in range(rng.integers(3, 7)):
        center_y, center_x = rng.uniform(0.1, 0.9, size=2)
        extent_y, extent_x = rng.uniform(0.05, 0.25, size=2)
        if rng.uniform() < 0.5:
            mask = (np.abs(y - center_y) < extent_y) & (np.abs(x - center_x) < extent_x)
        else:
            mask = (y - center_y) ** 2 + (x - center_x) ** 2 < extent_y ** 2
        vis[mask] = rng.uniform(0.0, 1.0, size=3)
        ir[mask] = rng.uniform(0.3, 1.0)

    frequency = rng.uniform(6.0, 14.0)
    texture = 0.03 * np.sin(2 * np.pi * frequency * x) * np.cos(2 * np.pi * frequency * y)
    vis = np.clip(vis + texture[..., None], 0.0, 1.0)
    ir = np.clip(ir + 0.5 * texture, 0.0, 1.0)
    return Image.from_array(vis.astype(np.float32)), Image.from_array(ir.astype(np.float32))


def procedural_pairs(count: int, seed: int, size: int = DEFAULT_SCENE_SIZE) -> list[CleanPair]:
    """``count`` procedural scenes, each seeded from (seed, index)."""
    pairs = []
    for index in range(count):
        vis, ir = make_scene(np.random.default_rng(stable_seed("scene", seed, index)), size)
        pairs.append(CleanPair(id=f"scene{index:04d}", vis=vis, ir=ir))
    return pairs


def source_pairs(src_root: str | Path) -> list[CleanPair]:
    """Clean pairs of an existing dataset, taken from its guidance images."""
    pairs = []
    for record in open_dataset(src_root).records:
        sample = load_sample(record)
        pairs.append(CleanPair(id=record.id, vis=sample.vis_guid, ir=sample.ir_guid))
    return pairs


def make_synthetic(
        clean_pairs: list[CleanPair],
        out_root: str | Path,
        categories: list[str],
        seed: int,
        config: DegradationConfig = DegradationConfig(),
) -> Manifest:
    """Write degraded sources, clean guidance, labels and manifest for every (pair, category)."""
    if not categories:
        raise DatasetError("At least one degradation category is needed")
    if not clean_pairs:
        raise DatasetError("No clean pairs to degrade")
    out_root = Path(out_root)
    records = []
    for pair in clean_pairs:
        gt_vis_path = out_root / "gt_vis" / f"{pair.id}.png"
        gt_ir_path = out_root / "gt_ir" / f"{pair.id}.png"
        save_image(gt_vis_path, pair.vis)
        save_image(gt_ir_path, pair.ir)
        for category in categories:
            stem = f"{pair.id}_{category}"
            vis, ir = degrade_pair(pair.vis, pair.ir, category, stable_seed("degrade", seed, stem), config)
            vis_path = out_root / "vis" / f"{stem}.png"
            ir_path = out_root / "ir" / f"{stem}.png"
            save_image(vis_path, vis)
            save_image(ir_path, ir)
            records.append(ManifestRecord(
                id=stem, vis_path=vis_path, ir_path=ir_path, vis_guid_path=gt_vis_path, ir_guid_path=gt_ir_path,
                category=category,
            ))

    manifest = Manifest(records=records)
    (out_root / LABELS_FILE_NAME).write_text(
        "".join(f"{record.id}\t{record.category}\n" for record in records), encoding="utf-8",
    )
    save_manifest(manifest, out_root / MANIFEST_FILE_NAME)
    logger.info(f"Synthesized {len(records)} records from {len(clean_pairs)} pairs into {out_root}")
    return manifest

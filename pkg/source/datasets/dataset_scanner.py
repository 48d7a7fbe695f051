"""Dataset directory scanning and sample loading.

Layout: ``root/{vis,ir}/<stem>.<ext>``, optional ``root/{gt_vis,gt_ir}/<stem>.<ext>`` guidance images and an
optional ``root/labels.tsv`` of ``stem<TAB>category`` rows. A ``manifest.jsonl`` at the root takes precedence.
"""
import logging
from pathlib import Path

from entities.image import ChannelLayout
from entities.sample_pair import CLEAN_CATEGORY, Manifest, ManifestRecord, SamplePair, Split
from outer_resources.image_files import IMAGE_SUFFIXES, load_image
from outer_resources.manifest_files import MANIFEST_FILE_NAME, load_manifest
from utils.exceptions import DatasetError

logger = logging.getLogger(__name__)

LABELS_FILE_NAME = "labels.tsv"


def _stem_to_path(directory: Path) -> dict[str, Path]:
    """Image files of a directory keyed by stem."""
    if not directory.is_dir():
        return {}
    stem_to_path = {}
    for path in sorted(directory.iterdir()):
        if path.suffix.lower() in IMAGE_SUFFIXES:
            if path.stem in stem_to_path:
                raise DatasetError(f"Stem {path.stem!r} appears twice in {directory}")
            stem_to_path[path.stem] = path
    return stem_to_path


def read_labels(path: Path) -> dict[str, str]:
    """Parse ``stem<TAB>category`` rows."""
    stem_to_category = {}
    for line_number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        stem, separator, category = line.partition("\t")
        if not separator or not category.strip():
            raise DatasetError(f"{path}:{line_number}: expected 'stem<TAB>category'")
        stem_to_category[stem.strip()] = category.strip()
    return stem_to_category


def scan_dataset(root: str | Path, split: Split = Split.TRAIN) -> Manifest:
    """Match visible and infrared files by stem; guidance defaults to the sources."""
    root = Path(root)
    if not (root / "vis").is_dir() or not (root / "ir").is_dir():
        raise DatasetError(f"{root} must contain vis/ and ir/ directories")
    vis_paths = _stem_to_path(root / "vis")
    ir_paths = _stem_to_path(root / "ir")
    gt_vis_paths = _stem_to_path(root / "gt_vis")
    gt_ir_paths = _stem_to_path(root / "gt_ir")
    labels_path = root / LABELS_FILE_NAME
    stem_to_category = read_labels(labels_path) if labels_path.is_file() else {}

    matched = sorted(vis_paths.keys() & ir_paths.keys())
    unmatched = sorted(vis_paths.keys() ^ ir_paths.keys())
    if unmatched:
        logger.warning(f"Unmatched stems in {root} are excluded: {unmatched}")
    records = [
        ManifestRecord(
            id=stem,
            vis_path=vis_paths[stem],
            ir_path=ir_paths[stem],
            vis_guid_path=gt_vis_paths.get(stem, vis_paths[stem]),
            ir_guid_path=gt_ir_paths.get(stem, ir_paths[stem]),
            category=stem_to_category.get(stem, CLEAN_CATEGORY),
        )
        for stem in matched
    ]
    if not records:
        raise DatasetError(f"No matched visible/infrared pairs in {root}")
    logger.info(f"Scanned {len(records)} pairs in {root}")
    return Manifest(records=records, split=split, unmatched=unmatched)


def open_dataset(root: str | Path, split: Split = Split.TRAIN) -> Manifest:
    """Read the manifest of a dataset directory, scanning it when there is none."""
    root = Path(root)
    manifest_path = root / MANIFEST_FILE_NAME
    manifest = load_manifest(manifest_path, split) if manifest_path.is_file() else scan_dataset(root, split)
    if not len(manifest):
        raise DatasetError(f"Dataset {root} is empty")
    manifest.check_files_exist()
    return manifest


def load_sample(record: ManifestRecord) -> SamplePair:
    """Read the four images of a record."""
    return SamplePair(
        vis=load_image(record.vis_path, ChannelLayout.RGB3),
        ir=load_image(record.ir_path, ChannelLayout.GRAY1),
        vis_guid=load_image(record.vis_guid_path, ChannelLayout.RGB3),
        ir_guid=load_image(record.ir_guid_path, ChannelLayout.GRAY1),
        category=record.category,
        id=record.id,
    )

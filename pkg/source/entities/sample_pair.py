"""SamplePair and Manifest module."""
from dataclasses import dataclass, field
from enum import StrEnum, unique
from pathlib import Path

from entities.image import ChannelLayout, Image
from utils.exceptions import DatasetError, ShapeMismatchError

CLEAN_CATEGORY = "clean"


@unique
class Split(StrEnum):
    """Split."""

    TRAIN = "train"
    TEST = "test"


@dataclass(frozen=True)
class SamplePair:
    """Aligned sources with their guidance images and degradation category."""

    vis: Image
    ir: Image
    vis_guid: Image
    ir_guid: Image
    category: str
    id: str

    def __post_init__(self) -> None:
        """Validate alignment and layouts."""
        if not self.category:
            raise DatasetError(f"Sample {self.id} has an empty category")
        shapes = {image.shape for image in (self.vis, self.ir, self.vis_guid, self.ir_guid)}
        if len(shapes) != 1:
            raise ShapeMismatchError(f"Sample {self.id} images differ in size: {sorted(shapes)}")
        if self.vis.channels is not ChannelLayout.RGB3 or self.vis_guid.channels is not ChannelLayout.RGB3:
            raise ShapeMismatchError(f"Sample {self.id} visible images must be RGB")
        if self.ir.channels is not ChannelLayout.GRAY1 or self.ir_guid.channels is not ChannelLayout.GRAY1:
            raise ShapeMismatchError(f"Sample {self.id} infrared images must be single channel")


@dataclass(frozen=True)
class ManifestRecord:
    """Paths of one sample plus its category."""

    id: str
    vis_path: Path
    ir_path: Path
    vis_guid_path: Path
    ir_guid_path: Path
    category: str = CLEAN_CATEGORY

    @property
    def has_ground_truth(self) -> bool:
        """Whether guidance differs from the sources."""
        return self.vis_guid_path != self.vis_path or self.ir_guid_path != self.ir_path


@dataclass
class Manifest:
    """Ordered sample records of one split."""

    records: list[ManifestRecord]
    split: Split = Split.TRAIN
    unmatched: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        """Validate id uniqueness."""
        ids = [record.id for record in self.records]
        if len(ids) != len(set(ids)):
            duplicates = sorted({record_id for record_id in ids if ids.count(record_id) > 1})
            raise DatasetError(f"Manifest ids are not unique: {duplicates}")

    def __len__(self) -> int:
        """Record count."""
        return len(self.records)

    def categories(self) -> list[str]:
        """Sorted distinct categories."""
        return sorted({record.category for record in self.records})

    def check_files_exist(self) -> None:
        """Raise DatasetError when any referenced file is missing."""
        for record in self.records:
            for path in (record.vis_path, record.ir_path, record.vis_guid_path, record.ir_guid_path):
                if not Path(path).is_file():
                    raise DatasetError(f"Sample {record.id} references missing file {path}")

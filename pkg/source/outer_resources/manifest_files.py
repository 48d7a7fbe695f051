"""Manifest file reading and writing.

``manifest.jsonl`` holds one JSON object per line with the sample id, the category and the four image paths
relative to the manifest's directory.
"""
import json
import logging
from pathlib import Path

from entities.sample_pair import Manifest, ManifestRecord, Split
from utils.exceptions import DatasetError

logger = logging.getLogger(__name__)

MANIFEST_FILE_NAME = "manifest.jsonl"
_PATH_KEYS = ("vis_path", "ir_path", "vis_guid_path", "ir_guid_path")


def _relative(path: Path, root: Path) -> str:
    """POSIX path relative to root when possible."""
    try:
        return Path(path).resolve().relative_to(root.resolve()).as_posix()
    except ValueError:
        return Path(path).as_posix()


def save_manifest(manifest: Manifest, path: str | Path) -> None:
    """Write a manifest, one record per line, in record order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for record in manifest.records:
        document = {"id": record.id, "category": record.category}
        document.update({key: _relative(getattr(record, key), path.parent) for key in _PATH_KEYS})
        lines.append(json.dumps(document, sort_keys=True))
    path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")


def load_manifest(path: str | Path, split: Split = Split.TRAIN) -> Manifest:
    """Read a manifest, labelling it with ``split``."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise DatasetError(f"Cannot read manifest {path}: {repr(e)}") from e
    records = []
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            document = json.loads(line)
            record = ManifestRecord(
                id=document["id"],
                category=document["category"],
                **{key: path.parent / document[key] for key in _PATH_KEYS},
            )
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise DatasetError(f"{path}:{line_number}: malformed record ({repr(e)})") from e
        records.append(record)
    logger.info(f"Loaded {len(records)} records from {path}")
    return Manifest(records=records, split=split)

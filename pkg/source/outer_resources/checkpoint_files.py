"""Checkpoint container reading and writing.

Layout, all integers little-endian: magic ``DTPF``, u32 format version, u32 metadata length, UTF-8 JSON metadata
(stage, step, network config and free-form training state), then tensor records until end of file. A record is
u32 name length, UTF-8 name, u8 dtype code, u8 rank, ``rank`` u32 dims and the raw little-endian payload.
"""
import json
import logging
import os
import struct
from pathlib import Path

import numpy as np
import torch
from torch import nn

from entities.checkpoint import CHECKPOINT_FORMAT_VERSION, Checkpoint, Stage
from network.net_config import NetConfig
from utils.exceptions import CheckpointFormatError, CheckpointShapeError, CheckpointVersionError, ConfigError

logger = logging.getLogger(__name__)

MAGIC = b"DTPF"
DTYPE_CODES = {0: np.dtype("<f4"), 1: np.dtype("u1")}
CODE_BY_DTYPE = {dtype: code for code, dtype in DTYPE_CODES.items()}


def save_checkpoint(checkpoint: Checkpoint, path: str | Path) -> None:
    """Write a checkpoint atomically."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    metadata = {
        "stage": str(checkpoint.stage),
        "step": checkpoint.step,
        "net_config": checkpoint.net_config.as_dict(),
        "extra": checkpoint.metadata,
    }
    metadata_bytes = json.dumps(metadata, sort_keys=True).encode("utf-8")
    chunks = [MAGIC, struct.pack("<II", checkpoint.format_version, len(metadata_bytes)), metadata_bytes]
    for name, tensor in checkpoint.tensors.items():
        array = np.asarray(tensor)
        array = array.astype(DTYPE_CODES[1] if array.dtype == np.uint8 else DTYPE_CODES[0], copy=False)
        name_bytes = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(name_bytes)))
        chunks.append(name_bytes)
        chunks.append(struct.pack("<BB", CODE_BY_DTYPE[array.dtype], array.ndim))
        chunks.append(struct.pack(f"<{array.ndim}I", *array.shape))
        chunks.append(np.ascontiguousarray(array).tobytes())

    temporary_path = path.with_name(f"{path.name}.tmp")
    temporary_path.write_bytes(b"".join(chunks))
    os.replace(temporary_path, path)
    logger.info(f"Saved {checkpoint.stage} checkpoint at step {checkpoint.step} to {path}")


class _Reader:
    """Bounds-checked cursor over checkpoint bytes."""

    def __init__(self, payload: bytes, path: Path) -> None:
        """init."""
        self.payload = payload
        self.path = path
        self.offset = 0

    @property
    def exhausted(self) -> bool:
        """Whether every byte was consumed."""
        return self.offset >= len(self.payload)

    def take(self, size: int) -> bytes:
        """Consume ``size`` bytes."""
        if self.offset + size > len(self.payload):
            raise CheckpointFormatError(f"Checkpoint {self.path} is truncated at byte {self.offset}")
        chunk = self.payload[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, layout: str) -> tuple:
        """Consume and unpack a struct layout."""
        return struct.unpack(layout, self.take(struct.calcsize(layout)))


def load_checkpoint(path: str | Path) -> Checkpoint:
    """Read and validate a checkpoint file."""
    path = Path(path)
    try:
        reader = _Reader(path.read_bytes(), path)
    except OSError as e:
        raise CheckpointFormatError(f"Cannot read checkpoint {path}: {repr(e)}") from e
    if reader.take(len(MAGIC)) != MAGIC:
        raise CheckpointFormatError(f"{path} is not a checkpoint (bad magic)")
    version, metadata_length = reader.unpack("<II")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointVersionError(f"{path} has format version {version}, expected {CHECKPOINT_FORMAT_VERSION}")
    try:
        metadata = json.loads(reader.take(metadata_length).decode("utf-8"))
        stage = Stage(metadata["stage"])
        net_config = NetConfig.from_dict(metadata["net_config"])
        step = int(metadata["step"])
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, ValueError, ConfigError) as e:
        raise CheckpointFormatError(f"{path} has malformed metadata: {repr(e)}") from e

    tensors = {}
    while not reader.exhausted:
        (name_length,) = reader.unpack("<I")
        name = reader.take(name_length).decode("utf-8", errors="replace")
        code, rank = reader.unpack("<BB")
        if code not in DTYPE_CODES:
            raise CheckpointFormatError(f"{path}: tensor {name!r} has unknown dtype code {code}")
        shape = reader.unpack(f"<{rank}I")
        dtype = DTYPE_CODES[code]
        size = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        if name in tensors:
            raise CheckpointFormatError(f"{path}: tensor {name!r} appears twice")
        tensors[name] = np.frombuffer(reader.take(size), dtype=dtype).reshape(shape).copy()

    logger.info(f"Loaded {stage} checkpoint at step {step} from {path}")
    return Checkpoint(
        stage=stage, net_config=net_config, step=step, tensors=tensors, metadata=metadata.get("extra", {}),
        format_version=version,
    )


def module_tensors(module: nn.Module, prefix: str = "") -> dict[str, np.ndarray]:
    """Persistent state of a module as float32 arrays."""
    return {
        f"{prefix}{name}": tensor.detach().cpu().to(torch.float32).numpy()
        for name, tensor in module.state_dict().items()
    }


def apply_tensors(module: nn.Module, tensors: dict[str, np.ndarray]) -> None:
    """Load named arrays into a module, rejecting misshaped, unknown and missing tensors in that order."""
    expected = module.state_dict()
    for name, reference in expected.items():
        if name in tensors and tuple(tensors[name].shape) != tuple(reference.shape):
            raise CheckpointShapeError(f"Tensor {name!r} has shape {tuple(tensors[name].shape)}, the network expects "
                                       f"{tuple(reference.shape)}")
    unknown = sorted(set(tensors) - set(expected))
    if unknown:
        raise CheckpointFormatError(f"Checkpoint holds unknown tensors, first: {unknown[0]!r} ({len(unknown)} total)")
    missing = [name for name in expected if name not in tensors]
    if missing:
        raise CheckpointFormatError(f"Checkpoint lacks tensor {missing[0]!r} ({len(missing)} total)")
    module.load_state_dict({
        name: torch.from_numpy(tensors[name]).to(dtype=reference.dtype) for name, reference in expected.items()
    })

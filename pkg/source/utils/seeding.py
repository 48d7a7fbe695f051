"""Reproducibility helpers."""
import hashlib
import random

import numpy as np
import torch


def stable_seed(*parts: object) -> int:
    """Derive a platform independent 64-bit seed from arbitrary parts.

    The parts are joined with ``\\x1f`` and hashed with SHA-256; the first eight bytes of the digest are read as an
    unsigned little-endian integer. Python's ``hash`` is salted per process and is never used here.
    """
    payload = "\x1f".join(str(part) for part in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little")


def seed_everything(seed: int) -> None:
    """Seed python, numpy and torch generators."""
    random.seed(seed)
    np.random.seed(seed % 2 ** 32)
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True, warn_only=True)

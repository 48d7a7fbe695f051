"""Module for time utilities."""
import time
from contextlib import contextmanager
from typing import Iterator

import numpy as np


def get_perf_time_ms() -> float:
    """Get monotonic high resolution time in milliseconds."""
    return time.perf_counter() * 1000.0


@contextmanager
def measure_ms(target: dict[str, float], key: str) -> Iterator[None]:
    """Store elapsed milliseconds of the enclosed block under ``key``."""
    started_at = get_perf_time_ms()
    try:
        yield
    finally:
        target[key] = get_perf_time_ms() - started_at


def summarize_ms(samples: list[float]) -> tuple[float, float]:
    """Return mean and median of millisecond samples."""
    if not samples:
        return 0.0, 0.0
    values = np.asarray(samples, dtype=np.float64)
    return float(values.mean()), float(np.median(values))

"""Counter-based random streams.

Every draw is keyed by ``(seed, stream, step)`` through Philox, so a run is
reproducible regardless of how work is scheduled; within a step the layout
``(particle, coordinate)`` fixes which variate goes where.
"""

from __future__ import annotations

import os

import numpy as np

STREAM_INIT = 0
STREAM_STEP = 1
STREAM_AUX = 2


def generator(seed: int, stream: int, step: int = 0) -> np.random.Generator:
    key = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, stream]).generate_state(2, np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, int(step), 0]))


def step_normals(seed: int, step: int, shape) -> np.ndarray:
    return generator(seed, STREAM_STEP, step).standard_normal(shape)


def worker_count() -> int:
    """Worker cap from ``MEANFIELD_IP_THREADS`` (defaults to the CPU count)."""
    raw = os.environ.get("MEANFIELD_IP_THREADS", "")
    try:
        val = int(raw)
    except ValueError:
        val = 0
    return max(1, val) if val > 0 else max(1, os.cpu_count() or 1)

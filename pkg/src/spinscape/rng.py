"""Counter-based random number streams.

All randomized operations draw from Philox4x64 streams keyed by
``(seed, run, replica)``.  Distinct key words give statistically
independent streams, so every run of a Monte Carlo experiment owns its
own deterministic stream: results are reproducible bit-for-bit from the
seed and do not depend on scheduling order, and extending a run's
horizon never perturbs the draws of another run.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, run: int = 0, replica: int = 0) -> np.random.Generator:
    """Generator for stream ``(seed, run, replica)``.

    The Philox key is the 128-bit word ``[seed, replica << 48 | run]``,
    so runs 0 <= run < 2**48 and replicas 0 <= replica < 2**16 never
    collide.
    """
    if not 0 <= run < 1 << 48:
        raise ValueError(f"run index out of range: {run}")
    if not 0 <= replica < 1 << 16:
        raise ValueError(f"replica index out of range: {replica}")
    key = np.array([np.uint64(seed & (1 << 64) - 1), np.uint64((replica << 48) | run)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))

"""Counter-based random streams for reproducible, order-independent trials.

Every trial draws from its own Philox stream keyed by (master seed, trial
index) with the stage number in the counter block, so results are identical
across platforms, worker counts, and execution orders.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def trial_generator(master_seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    bits = np.random.Philox(counter=[0, 0, 0, stream & MASK64],
                            key=[master_seed & MASK64, trial & MASK64])
    return np.random.Generator(bits)


def trial_uniforms(master_seed: int, trial: int, count: int, stream: int = 0) -> np.ndarray:
    """Per-site uniforms in [0, 1) (float32: plenty for p-thresholding and
    twice as fast to generate as doubles)."""
    return trial_generator(master_seed, trial, stream).random(count, dtype=np.float32)

"""
Reproducible random substreams.

All randomness in haarlab comes from numpy's counter-based Philox4x64-10
generator. A trial's generator is keyed by (seed, trial), so trial t sees the
same inputs no matter which other trials run, and a suite-specific counter
offset keeps different suites on disjoint streams.
"""

import numpy as np

from ..__version__ import RNG_ALGORITHM
from .exceptions import ValidationError

SEED_LIMIT = 1 << 64

__all__ = ["RNG_ALGORITHM", "SEED_LIMIT", "substream", "check_seed"]


def check_seed(seed: int) -> int:
    if not 0 <= int(seed) < SEED_LIMIT:
        raise ValidationError(
            f"Seed {seed} is not a 64-bit unsigned integer",
            field_name="seed",
            field_value=seed,
            expected_type="integer in [0, 2^64)",
        )
    return int(seed)


def substream(seed: int, trial: int = 0, stream: int = 0) -> np.random.Generator:
    """Generator for one trial of one suite.

    The Philox key packs seed and trial into 128 bits, which is injective in
    (seed, trial); ``stream`` offsets the high word of the counter.
    """
    check_seed(seed)
    if not 0 <= trial < SEED_LIMIT:
        raise ValidationError(
            f"Trial index {trial} out of range", field_name="trial", field_value=trial
        )
    if not 0 <= stream < SEED_LIMIT:
        raise ValidationError(
            f"Stream id {stream} out of range", field_name="stream", field_value=stream
        )
    key = int(seed) + (int(trial) << 64)
    bit_generator = np.random.Philox(key=key, counter=int(stream) << 192)
    return np.random.Generator(bit_generator)

"""Counter-based randomness for reproducible, partition-independent runs.

Per-step flip decisions hash (seed, stream, step, atom index) through a
SplitMix64 mix, so every atom owns its own stream and the result cannot
depend on how the ensemble is chunked across workers. Initial-condition
sampling uses numpy's Philox generator keyed by the seed.
"""

import numpy as np

_MIX1 = 0x9E3779B97F4A7C15
_MIX2 = 0xBF58476D1CE4E5B9
_MIX3 = 0x94D049BB133111EB
_STREAM = 0xD1342543DE82EF95
_MASK = 0xFFFFFFFFFFFFFFFF

FLIP_STREAM = 0
KICK_POLAR_STREAM = 1
KICK_AZIMUTH_STREAM = 2
EVENT_STREAM = 3


def counter_uniform(seed: int, step: int, idx: np.ndarray,
                    stream: int = FLIP_STREAM) -> np.ndarray:
    """Uniform [0, 1) doubles from the (seed, stream, step, idx) counters."""
    base = (int(seed) + int(step) * _MIX1 + int(stream) * _STREAM) & _MASK
    z = np.uint64(base) + idx.astype(np.uint64) * np.uint64(_MIX2)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX2)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX3)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def counter_unit_vectors(seed: int, step: int, idx: np.ndarray) -> np.ndarray:
    """Isotropic 3D unit vectors, one per idx, on dedicated streams."""
    u = counter_uniform(seed, step, idx, stream=KICK_POLAR_STREAM)
    v = counter_uniform(seed, step, idx, stream=KICK_AZIMUTH_STREAM)
    cos_t = 2.0 * u - 1.0
    sin_t = np.sqrt(np.maximum(1.0 - cos_t ** 2, 0.0))
    phi = 2.0 * np.pi * v
    return np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t], axis=1)


def philox(seed: int) -> np.random.Generator:
    """Keyed generator for initial-condition sampling."""
    return np.random.Generator(np.random.Philox(key=seed))

"""Counter-based pixel RNG.

Rendering draws every random number through a stateless hash of
(seed, stream, pixel index, sample index, dimension), so the output of a
render is independent of tile decomposition and thread count.  The hash is
splitmix64, evaluated with vectorized uint64 arithmetic.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(x: np.ndarray) -> np.ndarray:
    z = (x + _GAMMA).astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def hash_u64(seed: int, stream: int, counter: np.ndarray, dim: int) -> np.ndarray:
    """Hash (seed, stream, per-element counter, dim) into uint64 words."""
    c = np.asarray(counter, dtype=np.uint64)
    key = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ _mix(np.uint64(np.uint64(stream & 0xFFFFFFFFFFFFFFFF) * _GAMMA))
    z = _mix(c ^ key)
    z = _mix(z ^ np.uint64(np.uint64(dim & 0xFFFFFFFFFFFFFFFF) * _M1))
    return z


def uniform(seed: int, stream: int, counter: np.ndarray, dim: int) -> np.ndarray:
    """Deterministic floats in [0, 1), one per counter element."""
    bits = hash_u64(seed, stream, counter, dim)
    return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))

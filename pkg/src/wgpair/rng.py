"""Counter-based uniforms keyed by (master seed, trajectory index, step index).

numpy's generators are stateful streams; here every draw is a pure function
of its keys so a batch of trajectories can be advanced in lockstep, split
into chunks or run in any order with bitwise identical results. The mixing
function is the SplitMix64 finalizer.
"""
from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_STEP_SALT = np.uint64(0xD1B54A32D192ED03)


def mix64(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def trajectory_keys(seed: int, indices) -> np.ndarray:
    """64-bit per-trajectory keys derived from the master seed."""
    base = mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    with np.errstate(over="ignore"):
        return mix64(base + mix64(np.asarray(indices, dtype=np.uint64)))


def uniforms(keys: np.ndarray, step: int) -> np.ndarray:
    """One uniform in ``[0, 1)`` per key for the given step."""
    with np.errstate(over="ignore"):
        s = mix64(np.uint64(step) * _STEP_SALT)
        bits = mix64(keys ^ s)
    return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)

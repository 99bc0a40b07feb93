"""Counter-based pseudorandom generation.

Every random quantity in the simulator is addressed by an integer key derived
from a tuple like (seed, epoch, sample, layer, phase, line), so any single
draw is recomputable in isolation and results are independent of execution
order and thread count.  The mixer is the 64-bit splitmix finalizer applied to
a keyed counter sequence; vectorized numpy versions live here, scalar twins
used inside the compiled kernels live in kernels.py and must stay in lockstep.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# purpose tags folded into keys; values are arbitrary but frozen
PH_INIT_W = 1
PH_DW = 2
PH_BOUNDS = 3
PH_ROW_STREAM = 4
PH_COL_STREAM = 5
PH_FWD_NOISE = 6
PH_BWD_NOISE = 7
PH_C2C = 8
PH_SHUFFLE = 9
PH_EVAL = 10
PH_ASYM = 11


def mix64(z: int) -> int:
    """Splitmix64 finalizer on a python int, masked to 64 bits."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def fold(key: int, word: int) -> int:
    """Absorb one field into a key (order-sensitive)."""
    return mix64((key + GOLDEN + (word & MASK64)) & MASK64)


def derive(*words: int) -> int:
    """Build a key from a tuple of integer fields."""
    key = 0x243F6A8885A308D3  # pi fraction, arbitrary non-zero start
    for w in words:
        key = fold(key, w)
    return key


def raw64(key: int, n: int, offset: int = 0) -> np.ndarray:
    """n raw uint64 words from the counter stream of `key`."""
    ctr = (np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
           * np.uint64(GOLDEN)) + np.uint64(key & MASK64)
    z = ctr
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def uniforms(key: int, n: int, offset: int = 0) -> np.ndarray:
    """n doubles in [0, 1), one per counter position."""
    return (raw64(key, n, offset) >> np.uint64(11)) * 2.0 ** -53


def normals(key: int, n: int, offset: int = 0) -> np.ndarray:
    """n standard normals via Box-Muller; counter positions 2t, 2t+1 feed draw t.

    The scalar kernel twin consumes the identical counter layout, so numpy and
    compiled paths produce bit-identical draws for the same (key, t).
    """
    t = np.arange(offset, offset + n, dtype=np.uint64)
    w1 = _raw_at(key, np.uint64(2) * t)
    w2 = _raw_at(key, np.uint64(2) * t + np.uint64(1))
    u1 = 1.0 - (w1 >> np.uint64(11)) * 2.0 ** -53  # in (0, 1]
    u2 = (w2 >> np.uint64(11)) * 2.0 ** -53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def _raw_at(key: int, t: np.ndarray) -> np.ndarray:
    z = (t + np.uint64(1)) * np.uint64(GOLDEN) + np.uint64(key & MASK64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))

"""Stochastic bit streams and coincidence-based outer-product updates.

A number is encoded as a Bernoulli pulse train of length BL with firing
probability min(1, C*|value|); its sign travels on the phase mask, not in the
stream.  Multiplication reduces to counting slots where a row stream and a
column stream both fire; single-sided slots contribute through the device
non-linearity factor k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import arrays, prng


class StreamLengthError(ValueError):
    pass


@dataclass(frozen=True)
class TranslatorConfig:
    """Stream length and translator gain; p = min(1, gain*|value|)."""

    bl: int = 10
    gain: float = 1.0

    def __post_init__(self):
        if not 1 <= self.bl <= 64:
            raise ValueError("bl must be in [1, 64] (single-word packing)")
        if not self.gain > 0:
            raise ValueError("gain must be > 0")

    @staticmethod
    def matched_gain(eta: float, bl: int, dw_min: float) -> float:
        """Gain that matches the float learning rate: sqrt(eta/(BL*dw_min))."""
        return float(np.sqrt(eta / (bl * dw_min)))


@dataclass(frozen=True)
class StochasticStream:
    """One packed pulse train; bit t of `word` is the pulse in slot t."""

    word: int
    bl: int

    def __post_init__(self):
        if not 1 <= self.bl <= 64:
            raise ValueError("bl must be in [1, 64]")
        if self.word >> self.bl:
            raise ValueError("stream has bits beyond its length")

    @property
    def popcount(self) -> int:
        return self.word.bit_count()

    @property
    def bits(self) -> np.ndarray:
        return (np.uint64(self.word) >> np.arange(self.bl, dtype=np.uint64)
                & np.uint64(1)).astype(bool)


@dataclass(frozen=True)
class UpdatePhase:
    """Polarity bookkeeping: element direction factorizes as row * column sign."""

    direction: str  # "up" | "down"
    row_sign_mask: np.ndarray
    col_sign_mask: np.ndarray

    def element_signs(self) -> np.ndarray:
        return np.outer(self.row_sign_mask, self.col_sign_mask)


def translate(value: float, cfg: TranslatorConfig, key: int,
              line: int = 0) -> tuple[StochasticStream, int, bool]:
    """Encode one value; returns (stream, sign, clamped).

    Slot t of line i draws at counter i*64 + t of `key`, the same layout the
    compiled kernels use, so streams are reproducible from the key alone.
    """
    if not np.isfinite(value):
        raise ValueError("cannot translate a non-finite value")
    if value == 0.0:
        return StochasticStream(0, cfg.bl), 0, False
    p = cfg.gain * abs(value)
    clamped = p > 1.0
    sign = 1 if value > 0 else -1
    if p >= 1.0:
        word = (1 << cfg.bl) - 1
        return StochasticStream(word, cfg.bl), sign, clamped
    thresh = np.uint64(p * 2.0 ** 64)
    raw = prng.raw64(key, cfg.bl, offset=line * 64)
    word = 0
    for t in range(cfg.bl):
        if raw[t] < thresh:
            word |= 1 << t
    return StochasticStream(word, cfg.bl), sign, clamped


def translate_vector(values: np.ndarray, cfg: TranslatorConfig,
                     key: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Vectorized translate of one line vector; returns (words, signs, clamped)."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    praw = cfg.gain * np.abs(values)
    clamped = int(np.count_nonzero(praw > 1.0))
    p = np.minimum(praw, 1.0)
    grid = prng.raw64(key, n * 64).reshape(n, 64)[:, :cfg.bl]
    sat = p >= 1.0
    # compare in uint64 space, exactly as the compiled kernel does
    thresh = (np.where(sat, 0.0, p) * 2.0 ** 64).astype(np.uint64)
    fired = grid < thresh[:, None]
    fired |= sat[:, None]
    fired &= (values != 0.0)[:, None]
    weights = (np.uint64(1) << np.arange(cfg.bl, dtype=np.uint64))
    words = (fired.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
    signs = np.sign(values).astype(np.int64)
    return words, signs, clamped


def coincidence_counts(row_stream: StochasticStream,
                       col_stream: StochasticStream) -> tuple[int, int]:
    """(AND count, XOR count) of two pulse trains."""
    if row_stream.bl != col_stream.bl:
        raise StreamLengthError(
            f"stream lengths differ: {row_stream.bl} != {col_stream.bl}")
    both = row_stream.word & col_stream.word
    either = row_stream.word ^ col_stream.word
    return both.bit_count(), either.bit_count()


def expected_update(x_i: float, delta_j: float, eta: float,
                    cfg: TranslatorConfig) -> tuple[float, bool]:
    """Analytic mean of the stochastic update: BL * dw_min * C^2 * x * delta.

    dw_min is implied by the learning-rate match eta = BL * dw_min * C^2, so
    the unclamped expectation is exactly eta * x * delta.  The flag marks the
    clamped regime (probability hit 1), where the value is an upper bound on
    the magnitude rather than the expectation.
    """
    clamped = cfg.gain * abs(x_i) > 1.0 or cfg.gain * abs(delta_j) > 1.0
    dw_min = eta / (cfg.bl * cfg.gain ** 2)
    return cfg.bl * dw_min * cfg.gain ** 2 * x_i * delta_j, clamped


def stochastic_outer_update(x: np.ndarray, delta: np.ndarray, eta: float,
                            state: arrays.DeviceArrayState,
                            cfg: TranslatorConfig, key_row: int, key_col: int,
                            key_c2c: int, dw_scale: float = 1.0) -> int:
    """Reference outer-product update: mutates `state`, returns clamp count.

    Streams are drawn once per row and once per column and shared across the
    array, inducing the row/column correlations of the physical scheme.  The
    fused kernel path reproduces this update bit-for-bit for the same keys.
    """
    x = np.asarray(x, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if x.shape[0] != state.W.shape[0] or delta.shape[0] != state.W.shape[1]:
        raise arrays.DimensionMismatchError("vector lengths must match array")
    if eta <= 0:
        raise ValueError("eta must be > 0")
    row_words, row_signs, c1 = translate_vector(x, cfg, key_row)
    col_words, col_signs, c2 = translate_vector(delta, cfg, key_col)
    both = np.bitwise_count(row_words[:, None] & col_words[None, :])
    either = np.bitwise_count(row_words[:, None] ^ col_words[None, :])
    signs = np.outer(row_signs, col_signs)
    arrays.apply_coincidences(state, both.astype(float), either.astype(float),
                              signs, key_c2c, dw_scale=dw_scale)
    return c1 + c2

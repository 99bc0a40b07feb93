"""Weight matrices stored on resistive cross-point devices.

Models the analog array in the weight domain: per-device up/down increments
with device-to-device and pulse-to-pulse variability, per-device weight
bounds, and the analog readout path (additive Gaussian noise, bounded
peripheral input, time-quantized inputs).  These numpy implementations are
the reference semantics; the fused training kernels in kernels.py consume the
same state arrays and the same counter keys.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import prng


class DimensionMismatchError(ValueError):
    pass


@dataclass
class DeviceArraySpec:
    """Device population parameters for one array.

    Relative spreads (`sigma_*`) are fractions of the relevant mean, matching
    the percentage axes of the stress tests.  `asym_up`/`asym_down` weaken one
    polarity: the weakened mean increment is (1 - asym) * dw_min_mean.
    """

    rows: int
    cols: int
    dw_min_mean: float = 0.001
    sigma_c2c: float = 0.0
    sigma_d2d: float = 0.0
    bound_mean: float = np.inf
    sigma_bound: float = 0.0
    asym_up: float = 0.0
    asym_down: float = 0.0
    sigma_asym: float = 0.0
    k: float = 0.0

    def validate(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError("array dims must be positive")
        if not self.dw_min_mean > 0:
            raise ValueError("dw_min_mean must be > 0")
        if not self.bound_mean > 0:
            raise ValueError("bound_mean must be > 0")
        for name in ("sigma_c2c", "sigma_d2d", "sigma_bound", "sigma_asym"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.k <= 1.0:
            raise ValueError("k must be in [0, 1]")
        if not 0.0 <= self.asym_up < 1.0 or not 0.0 <= self.asym_down < 1.0:
            raise ValueError("asymmetry fractions must be in [0, 1)")

    @property
    def is_uniform_unbounded(self) -> bool:
        """True when every device is identical and bounds are off."""
        return (self.sigma_d2d == 0.0 and self.sigma_asym == 0.0
                and self.sigma_bound == 0.0 and self.asym_up == 0.0
                and self.asym_down == 0.0 and np.isinf(self.bound_mean))


@dataclass
class ReadoutConfig:
    """Analog read path non-idealities.

    noise_sigma is in activation-temperature units (temperature = 1 here).
    alpha_bound clips the vector-matrix result symmetrically (inf = off).
    input_pulses quantizes input magnitudes to that many uniform levels on
    [0, 1] (0 = continuous inputs).
    """

    noise_sigma: float = 0.0
    alpha_bound: float = np.inf
    input_pulses: int = 0

    def validate(self) -> None:
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if not self.alpha_bound > 0:
            raise ValueError("alpha_bound must be > 0")
        if self.input_pulses < 0:
            raise ValueError("input_pulses must be >= 1 when set")


@dataclass
class DeviceArrayState:
    """Sampled device population plus the live weight matrix."""

    spec: DeviceArraySpec
    W: np.ndarray
    dw_up: np.ndarray
    dw_down: np.ndarray
    b_lo: np.ndarray
    b_hi: np.ndarray

    def clip_weights(self) -> None:
        np.clip(self.W, self.b_lo, self.b_hi, out=self.W)


_DW_FLOOR = 0.01  # increments truncated below at 1% of their mean
_RATIO_FLOOR = 0.01


def materialize(spec: DeviceArraySpec, seed: int, layer: int = 0,
                init_scale: float = 0.1) -> DeviceArrayState:
    """Sample a device population and an initial weight matrix.

    Per-device magnitude and per-device up/down ratio are sampled once, at
    build time.  Both polarities of one device share the magnitude draw (a
    device has a single increment scale; asymmetry is a separate ratio), so
    wide device-to-device spreads do not leak into the up/down balance.
    """
    spec.validate()
    n = spec.rows * spec.cols
    shape = (spec.rows, spec.cols)

    base = np.ones(n)
    if spec.sigma_d2d > 0:
        g = prng.normals(prng.derive(seed, prng.PH_DW, layer), n)
        base = np.maximum(1.0 + spec.sigma_d2d * g, _DW_FLOOR)
    ratio = np.ones(n)
    if spec.sigma_asym > 0:
        g = prng.normals(prng.derive(seed, prng.PH_ASYM, layer), n)
        ratio = np.maximum(1.0 + spec.sigma_asym * g, _RATIO_FLOOR)
    root = np.sqrt(ratio)
    dw_up = (spec.dw_min_mean * (1.0 - spec.asym_up) * base * root)
    dw_down = (spec.dw_min_mean * (1.0 - spec.asym_down) * base / root)
    dw_up = np.maximum(dw_up, _DW_FLOOR * spec.dw_min_mean).reshape(shape)
    dw_down = np.maximum(dw_down, _DW_FLOOR * spec.dw_min_mean).reshape(shape)

    if np.isinf(spec.bound_mean):
        b_hi = np.full(shape, np.inf)
        b_lo = np.full(shape, -np.inf)
    else:
        g = prng.normals(prng.derive(seed, prng.PH_BOUNDS, layer), 2 * n)
        hi = spec.bound_mean * (1.0 + spec.sigma_bound * g[:n])
        lo = -spec.bound_mean * (1.0 + spec.sigma_bound * g[n:])
        b_hi = np.maximum(hi, lo)
        b_lo = np.minimum(hi, lo)
        gap = 2 * _DW_FLOOR * spec.bound_mean
        narrow = (b_hi - b_lo) < gap
        mid = 0.5 * (b_hi + b_lo)
        b_hi = np.where(narrow, mid + 0.5 * gap, b_hi).reshape(shape)
        b_lo = np.where(narrow, mid - 0.5 * gap, b_lo).reshape(shape)
        b_hi = np.ascontiguousarray(b_hi)
        b_lo = np.ascontiguousarray(b_lo)

    u = prng.uniforms(prng.derive(seed, prng.PH_INIT_W, layer), n)
    W = (init_scale * (2.0 * u - 1.0)).reshape(shape)
    state = DeviceArrayState(spec, W, dw_up, dw_down, b_lo, b_hi)
    state.clip_weights()
    return state


def _quantize(x: np.ndarray, pulses: int) -> np.ndarray:
    if pulses <= 0:
        return x
    mag = np.minimum(np.abs(x), 1.0)
    return np.sign(x) * np.rint(mag * pulses) / pulses


def read_forward(state: DeviceArrayState, x: np.ndarray, cfg: ReadoutConfig,
                 key: int) -> np.ndarray:
    """y = clip(W^T q(x) + noise, +-alpha)."""
    if x.shape[0] != state.W.shape[0]:
        raise DimensionMismatchError(
            f"input length {x.shape[0]} != rows {state.W.shape[0]}")
    y = _quantize(np.asarray(x, dtype=float), cfg.input_pulses) @ state.W
    if cfg.noise_sigma > 0:
        y = y + cfg.noise_sigma * prng.normals(key, y.shape[0])
    return np.clip(y, -cfg.alpha_bound, cfg.alpha_bound)


def read_backward(state: DeviceArrayState, delta: np.ndarray,
                  cfg: ReadoutConfig, key: int) -> np.ndarray:
    """Transpose read: y = clip(W q(delta) + noise, +-alpha)."""
    if delta.shape[0] != state.W.shape[1]:
        raise DimensionMismatchError(
            f"input length {delta.shape[0]} != cols {state.W.shape[1]}")
    y = state.W @ _quantize(np.asarray(delta, dtype=float), cfg.input_pulses)
    if cfg.noise_sigma > 0:
        y = y + cfg.noise_sigma * prng.normals(key, y.shape[0])
    return np.clip(y, -cfg.alpha_bound, cfg.alpha_bound)


def apply_coincidences(state: DeviceArrayState, and_counts: np.ndarray,
                       xor_counts: np.ndarray, signs: np.ndarray,
                       key: int, dw_scale: float = 1.0) -> None:
    """Apply counted pulse coincidences to the weights, in place.

    n = and + k*xor per element; the sum of n noisy per-coincidence increments
    is sampled in closed form as Normal(n*dw, sqrt(n)*sigma_c2c*dw).  The c2c
    draw for element (i, j) sits at counter i*cols + j of `key`.
    """
    if and_counts.shape != state.W.shape or xor_counts.shape != state.W.shape:
        raise DimensionMismatchError("count matrices must match array dims")
    spec = state.spec
    n = and_counts + spec.k * xor_counts
    dw = np.where(signs > 0, state.dw_up, state.dw_down) * dw_scale
    change = n * dw
    if spec.sigma_c2c > 0:
        z = prng.normals(key, state.W.size).reshape(state.W.shape)
        change = change + np.sqrt(n) * spec.sigma_c2c * dw * z
    state.W += np.where(signs == 0, 0.0, np.sign(signs)) * change
    state.clip_weights()


_MAGIC = b"RPUA"


def save_state(state: DeviceArrayState, path) -> None:
    """Binary snapshot: magic, dims header, then five row-major float64 blocks."""
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack(">II", *state.W.shape))
        for a in (state.W, state.dw_up, state.dw_down, state.b_lo, state.b_hi):
            f.write(np.ascontiguousarray(a, dtype="<f8").tobytes())
        f.write(struct.pack(">11d", state.spec.dw_min_mean, state.spec.sigma_c2c,
                            state.spec.sigma_d2d, state.spec.bound_mean,
                            state.spec.sigma_bound, state.spec.asym_up,
                            state.spec.asym_down, state.spec.sigma_asym,
                            state.spec.k, 0.0, 0.0))


def load_state(path) -> DeviceArrayState:
    with open(path, "rb") as f:
        if f.read(4) != _MAGIC:
            raise ValueError(f"{path}: not an array snapshot")
        rows, cols = struct.unpack(">II", f.read(8))
        n = rows * cols
        mats = []
        for _ in range(5):
            buf = f.read(8 * n)
            if len(buf) != 8 * n:
                raise ValueError(f"{path}: truncated snapshot")
            mats.append(np.frombuffer(buf, dtype="<f8").reshape(rows, cols).copy())
        tail = struct.unpack(">11d", f.read(88))
    spec = DeviceArraySpec(rows=rows, cols=cols, dw_min_mean=tail[0],
                           sigma_c2c=tail[1], sigma_d2d=tail[2],
                           bound_mean=tail[3], sigma_bound=tail[4],
                           asym_up=tail[5], asym_down=tail[6],
                           sigma_asym=tail[7], k=tail[8])
    return DeviceArrayState(spec, *mats)

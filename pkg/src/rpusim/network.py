"""Fully connected network trained by per-sample backpropagation.

Two modes share one code path: `baseline` applies the float outer-product
rule, `stochastic` routes every update through pulse-stream coincidences on
the device arrays and keeps the analog read path (noise, bounded peripheral
inputs) active during both training and evaluation.

Each layer owns one device array with an extra always-on input row that
carries the bias, trained like any other weight.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba.typed import List as TypedList

from . import arrays, kernels, prng
from .arrays import DeviceArraySpec, ReadoutConfig
from .streams import TranslatorConfig

BASELINE = "baseline"
STOCHASTIC = "stochastic"

# learning-rate match between the float rule and the stream rule
RULE_BASELINE = "baseline"
RULE_DW_FOLLOWS_ETA = "dwmin-follows-eta"  # dw_min = eta/BL, gain 1
RULE_FIXED_DW = "fixed-dwmin"              # gain = sqrt(eta/(BL*dw_min))


@dataclass
class NetworkConfig:
    """Architecture contract; temperature other than unity is out of scope."""

    layer_sizes: tuple[int, ...] = (784, 256, 128, 10)
    hidden_activation: str = "sigmoid"
    output_activation: str = "softmax"
    temperature: float = 1.0
    objective: str = "cross-entropy"
    batch_size: int = 1

    def validate(self) -> None:
        if len(self.layer_sizes) < 2:
            raise ValueError("need at least input and output layers")
        if any(n < 1 for n in self.layer_sizes):
            raise ValueError("layer sizes must be positive")
        if not self.temperature > 0:
            raise ValueError("temperature must be > 0")
        if self.temperature != 1.0:
            raise NotImplementedError("only unit temperature is supported")
        if self.batch_size != 1:
            raise NotImplementedError("training is defined per sample")


@dataclass
class LrSchedule:
    """Epoch-indexed learning rates as contiguous half-open ranges."""

    spans: tuple[tuple[int, int, float], ...]

    @staticmethod
    def paper_default() -> "LrSchedule":
        return LrSchedule(((0, 10, 0.01), (10, 20, 0.005), (20, 30, 0.0025)))

    @staticmethod
    def constant(eta: float, epochs: int) -> "LrSchedule":
        return LrSchedule(((0, epochs, eta),))

    def validate(self) -> None:
        if not self.spans:
            raise ValueError("schedule is empty")
        expect = 0
        for start, stop, eta in self.spans:
            if start != expect or stop <= start:
                raise ValueError("ranges must be contiguous and non-empty")
            if not eta > 0:
                raise ValueError("eta must be > 0")
            expect = stop
        self._stop = expect

    @property
    def epochs(self) -> int:
        return self.spans[-1][1]

    def eta_for(self, epoch: int) -> float:
        for start, stop, eta in self.spans:
            if start <= epoch < stop:
                return eta
        return self.spans[-1][2]  # past the last span: keep the final rate


@dataclass
class EpochResult:
    epoch: int
    error_percent: float
    saturation_fraction: float
    wallclock: float


@dataclass
class TrainRun:
    mode: str
    seed: int
    epochs: list[EpochResult] = field(default_factory=list)

    @property
    def final_error(self) -> float:
        return self.epochs[-1].error_percent

    def validate(self) -> None:
        for r in self.epochs:
            if not 0.0 <= r.error_percent <= 100.0:
                raise ValueError("error must be a percentage")


class Network:
    """A stack of device arrays plus the training loop."""

    def __init__(self, net_cfg: NetworkConfig, array_spec: DeviceArraySpec,
                 readout: ReadoutConfig, alpha_output: float,
                 translator: TranslatorConfig, mode: str, lr_rule: str,
                 seed: int, base_eta: float = 0.01):
        net_cfg.validate()
        readout.validate()
        if mode not in (BASELINE, STOCHASTIC):
            raise ValueError(f"unknown mode {mode!r}")
        self.cfg = net_cfg
        self.mode = mode
        self.lr_rule = lr_rule
        self.seed = seed
        self.readout = readout
        self.alpha_output = alpha_output
        self.translator = translator
        self.base_eta = base_eta

        dw_mean = array_spec.dw_min_mean
        if mode == STOCHASTIC and lr_rule == RULE_DW_FOLLOWS_ETA:
            dw_mean = base_eta / translator.bl

        sizes = net_cfg.layer_sizes
        self.states = []
        for l in range(len(sizes) - 1):
            spec_l = DeviceArraySpec(
                rows=sizes[l] + 1, cols=sizes[l + 1],
                dw_min_mean=dw_mean,
                sigma_c2c=array_spec.sigma_c2c,
                sigma_d2d=array_spec.sigma_d2d,
                bound_mean=array_spec.bound_mean,
                sigma_bound=array_spec.sigma_bound,
                asym_up=array_spec.asym_up,
                asym_down=array_spec.asym_down,
                sigma_asym=array_spec.sigma_asym,
                k=array_spec.k)
            self.states.append(arrays.materialize(spec_l, seed, layer=l))
        self._uniform_unbounded = array_spec.is_uniform_unbounded
        self._k = array_spec.k
        self._sigma_c2c = array_spec.sigma_c2c
        self._lists = None

    # -- plumbing ---------------------------------------------------------

    def _typed_lists(self):
        if self._lists is None:
            Ws, dwu, dwd, blo, bhi = (TypedList() for _ in range(5))
            for st in self.states:
                Ws.append(st.W)
                dwu.append(st.dw_up)
                dwd.append(st.dw_down)
                blo.append(st.b_lo)
                bhi.append(st.b_hi)
            self._lists = (Ws, dwu, dwd, blo, bhi)
        return self._lists

    def _epoch_knobs(self, epoch: int, schedule: LrSchedule):
        """Per-epoch (gain, dw_scale, eta) under the configured rate rule."""
        eta = schedule.eta_for(epoch)
        if self.mode == BASELINE:
            return 1.0, 1.0, eta
        if self.lr_rule == RULE_DW_FOLLOWS_ETA:
            # arrays were built with dw_min_mean = base_eta/BL
            return 1.0, eta / self.base_eta, eta
        if self.lr_rule == RULE_FIXED_DW:
            dw = self.states[0].spec.dw_min_mean
            return TranslatorConfig.matched_gain(eta, self.translator.bl, dw), 1.0, eta
        raise ValueError(f"unknown lr rule {self.lr_rule!r}")

    @property
    def stochastic(self) -> bool:
        return self.mode == STOCHASTIC

    # -- spec operations ---------------------------------------------------

    def forward_pass(self, x: np.ndarray, key: int):
        """Activations per layer (with bias slots) and output probabilities."""
        Ws = self._typed_lists()[0]
        acts = TypedList()
        for st in self.states:
            acts.append(np.empty(st.W.shape[0]))
        probs = np.empty(self.cfg.layer_sizes[-1])
        a0 = acts[0]
        a0[:-1] = x
        a0[-1] = 1.0
        kernels.forward_sample(Ws, acts, probs, self.readout.noise_sigma,
                               self.readout.alpha_bound, self.alpha_output,
                               self.readout.input_pulses, np.uint64(key),
                               self.stochastic)
        return [np.asarray(a) for a in acts], np.asarray(probs)

    def backward_pass(self, acts, probs, label: int, key: int):
        """Gradient-convention deltas per layer: output delta = probs - onehot."""
        Ws = self._typed_lists()[0]
        acts_t = TypedList()
        for a in acts:
            acts_t.append(np.asarray(a, dtype=float))
        deltas = TypedList()
        for st in self.states:
            deltas.append(np.empty(st.W.shape[1]))
        kernels.backward_sample(Ws, acts_t, np.asarray(probs, dtype=float),
                                label, deltas, self.readout.noise_sigma,
                                self.readout.alpha_bound, self.alpha_output,
                                self.readout.input_pulses, np.uint64(key),
                                self.stochastic)
        return [np.asarray(d) for d in deltas]

    def evaluate_error(self, images: np.ndarray, labels: np.ndarray,
                       epoch: int = 0) -> float:
        """Percent misclassified; read noise stays on in stochastic mode."""
        Ws = self._typed_lists()[0]
        key = prng.derive(self.seed, prng.PH_EVAL, epoch)
        wrong = kernels.count_errors(
            Ws, np.ascontiguousarray(images, dtype=np.float32),
            np.ascontiguousarray(labels, dtype=np.int64), np.uint64(key),
            self.stochastic, self.readout.noise_sigma,
            self.readout.alpha_bound, self.alpha_output,
            self.readout.input_pulses)
        return 100.0 * wrong / images.shape[0]

    def train_epoch(self, images: np.ndarray, labels: np.ndarray, epoch: int,
                    schedule: LrSchedule, samples: int | None = None):
        """One pass of shuffled single-sample training; returns saturation."""
        Ws, dwu, dwd, blo, bhi = self._typed_lists()
        n = images.shape[0]
        order = kernels.permutation(
            np.uint64(prng.derive(self.seed, prng.PH_SHUFFLE, epoch)), n)
        take = n if samples is None else min(samples, n)
        gain, dw_scale, eta = self._epoch_knobs(epoch, schedule)
        clamped, total = kernels.train_samples(
            Ws, dwu, dwd, blo, bhi,
            np.ascontiguousarray(images, dtype=np.float32),
            np.ascontiguousarray(labels, dtype=np.int64),
            order, take, np.uint64(prng.derive(self.seed, epoch)),
            self.stochastic, self.translator.bl, gain, dw_scale, eta,
            self._k, self._sigma_c2c, self._uniform_unbounded,
            self.readout.noise_sigma, self.readout.alpha_bound,
            self.alpha_output, self.readout.input_pulses)
        return (clamped / total) if total else 0.0

    def train(self, train_images, train_labels, test_images, test_labels,
              schedule: LrSchedule, epochs: int,
              samples_per_epoch: int | None = None,
              on_epoch=None) -> TrainRun:
        schedule.validate()
        run = TrainRun(mode=self.mode, seed=self.seed)
        t0 = time.perf_counter()
        err = self.evaluate_error(test_images, test_labels, epoch=0)
        run.epochs.append(EpochResult(0, err, 0.0, time.perf_counter() - t0))
        if on_epoch:
            on_epoch(run.epochs[-1])
        for e in range(epochs):
            t0 = time.perf_counter()
            sat = self.train_epoch(train_images, train_labels, e, schedule,
                                   samples_per_epoch)
            err = self.evaluate_error(test_images, test_labels, epoch=e + 1)
            run.epochs.append(
                EpochResult(e + 1, err, sat, time.perf_counter() - t0))
            if on_epoch:
                on_epoch(run.epochs[-1])
        run.validate()
        return run

    # -- checkpointing -----------------------------------------------------

    def save_checkpoint(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        for l, st in enumerate(self.states):
            arrays.save_state(st, d / f"layer{l}.rpua")
        meta = {"mode": self.mode, "seed": self.seed,
                "layer_sizes": list(self.cfg.layer_sizes),
                "lr_rule": self.lr_rule}
        (d / "meta.json").write_text(json.dumps(meta, indent=1))

    def load_checkpoint(self, directory) -> None:
        d = Path(directory)
        meta = json.loads((d / "meta.json").read_text())
        if tuple(meta["layer_sizes"]) != tuple(self.cfg.layer_sizes):
            raise ValueError("checkpoint does not match this architecture")
        self.states = [arrays.load_state(d / f"layer{l}.rpua")
                       for l in range(len(self.cfg.layer_sizes) - 1)]
        self._lists = None

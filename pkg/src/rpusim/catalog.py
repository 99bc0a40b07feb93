"""Named experiment catalog and the flat key-value config format.

Every curve of the reproduced figure panels appears here once, carrying the
exact scan values from the source captions.  An experiment name resolves to
one catalog entry; anything else is read as a path to a config file in the
same format `to_config_text` emits (one dotted key per line, diff-friendly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .arrays import DeviceArraySpec, ReadoutConfig
from .network import (BASELINE, RULE_BASELINE, RULE_DW_FOLLOWS_ETA,
                      RULE_FIXED_DW, STOCHASTIC, LrSchedule, NetworkConfig)

PAPER_SCHEDULE = ((0, 10, 0.01), (10, 20, 0.005), (20, 30, 0.0025))
DEFAULT_SEEDS = (1, 2, 3)


class UnknownExperimentError(KeyError):
    pass


@dataclass
class ExperimentSpec:
    """Complete description of one training experiment."""

    name: str
    mode: str = STOCHASTIC
    lr_rule: str = RULE_FIXED_DW
    epochs: int = 30
    schedule: tuple = PAPER_SCHEDULE
    seeds: tuple = DEFAULT_SEEDS
    samples_per_epoch: int = 0          # 0 = full training set
    layer_sizes: tuple = (784, 256, 128, 10)
    bl: int = 10
    dw_min_mean: float = 0.001
    sigma_c2c: float = 0.0
    sigma_d2d: float = 0.0
    bound_mean: float = math.inf
    sigma_bound: float = 0.0
    asym_up: float = 0.0
    asym_down: float = 0.0
    sigma_asym: float = 0.0
    k: float = 0.0
    noise_sigma: float = 0.0
    alpha_hidden: float = math.inf
    alpha_output: float = math.inf
    input_pulses: int = 0
    note: str = ""

    def array_spec(self) -> DeviceArraySpec:
        return DeviceArraySpec(
            rows=1, cols=1, dw_min_mean=self.dw_min_mean,
            sigma_c2c=self.sigma_c2c, sigma_d2d=self.sigma_d2d,
            bound_mean=self.bound_mean, sigma_bound=self.sigma_bound,
            asym_up=self.asym_up, asym_down=self.asym_down,
            sigma_asym=self.sigma_asym, k=self.k)

    def readout(self) -> ReadoutConfig:
        return ReadoutConfig(noise_sigma=self.noise_sigma,
                             alpha_bound=self.alpha_hidden,
                             input_pulses=self.input_pulses)

    def lr_schedule(self) -> LrSchedule:
        s = LrSchedule(tuple(tuple(x) for x in self.schedule))
        s.validate()
        return s

    def network_config(self) -> NetworkConfig:
        return NetworkConfig(layer_sizes=tuple(self.layer_sizes))


def _baseline(name, note=""):
    return ExperimentSpec(name=name, mode=BASELINE, lr_rule=RULE_BASELINE,
                          note=note)


def _bl_matched(name, **kw):
    """Stream model with dw_min = eta/BL and unit gain."""
    return ExperimentSpec(name=name, mode=STOCHASTIC,
                          lr_rule=RULE_DW_FOLLOWS_ETA, **kw)


def _fixed_dw(name, **kw):
    """Stream model with fixed dw_min and gain sqrt(eta/(BL*dw_min))."""
    return ExperimentSpec(name=name, mode=STOCHASTIC, lr_rule=RULE_FIXED_DW,
                          **kw)


def catalog() -> list[ExperimentSpec]:
    """All named experiments, one per reproduced curve."""
    out = [
        _baseline("fig2a.baseline", note="float update rule reference"),
        # stream-length scan
        _bl_matched("fig2a.bl1", bl=1),
        _bl_matched("fig2a.bl2", bl=2),
        _bl_matched("fig2a.bl10", bl=10),
        # non-linearity-factor scan at BL = 10
        _bl_matched("fig2b.k0.5", k=0.5),
        _bl_matched("fig2b.k0.4", k=0.4),
        _bl_matched("fig2b.k0.1", k=0.1),
        # single-coincidence step size
        _fixed_dw("fig3a.line1", dw_min_mean=0.1),
        _fixed_dw("fig3a.line2", dw_min_mean=0.032),
        _fixed_dw("fig3a.line3", dw_min_mean=0.01),
        # weight range
        _fixed_dw("fig3b.bound0.1", bound_mean=0.1),
        _fixed_dw("fig3b.bound0.2", bound_mean=0.2),
        _fixed_dw("fig3b.bound0.3", bound_mean=0.3),
        # pulse-to-pulse step variability
        _fixed_dw("fig3c.line1", sigma_c2c=10.0),
        _fixed_dw("fig3c.line2", sigma_c2c=3.2),
        _fixed_dw("fig3c.line3", sigma_c2c=1.0),
        # device-to-device step variability
        _fixed_dw("fig3d.line1", sigma_d2d=10.0),
        _fixed_dw("fig3d.line2", sigma_d2d=3.2),
        _fixed_dw("fig3d.line3", sigma_d2d=1.0),
        # device-to-device bound variability around +-1.0
        _fixed_dw("fig3e.line1", bound_mean=1.0, sigma_bound=10.0),
        _fixed_dw("fig3e.line2", bound_mean=1.0, sigma_bound=3.2),
        _fixed_dw("fig3e.line3", bound_mean=1.0, sigma_bound=1.0),
        # global asymmetry: down changes weaker by the stated fraction
        _fixed_dw("fig3f.line1", asym_down=0.5),
        _fixed_dw("fig3f.line2", asym_down=0.75),
        _fixed_dw("fig3f.line3", asym_down=0.9),
        _fixed_dw("fig3g.line1", asym_up=0.5),
        _fixed_dw("fig3g.line2", asym_up=0.75),
        _fixed_dw("fig3g.line3", asym_up=0.9),
        # device-to-device up/down mismatch
        _fixed_dw("fig3h.line1", sigma_asym=0.40),
        _fixed_dw("fig3h.line2", sigma_asym=0.20),
        _fixed_dw("fig3h.line3", sigma_asym=0.06),
        # read noise on the vector-matrix result
        _fixed_dw("fig3i.line1", noise_sigma=1.0),
        _fixed_dw("fig3i.line2", noise_sigma=0.6),
        _fixed_dw("fig3i.line3", noise_sigma=0.1),
    ]
    # single-parameter tolerance thresholds (radar axes C-I)
    out += [
        _fixed_dw("fig4a.c", sigma_c2c=1.5),
        _fixed_dw("fig4a.d", sigma_d2d=1.1),
        _fixed_dw("fig4a.e", bound_mean=1.0, sigma_bound=0.8),
        _fixed_dw("fig4a.f", asym_down=0.05),
        _fixed_dw("fig4a.g", asym_up=0.05),
        _fixed_dw("fig4a.h", sigma_asym=0.06),
        _fixed_dw("fig4a.i", noise_sigma=0.1),
    ]
    # combined models
    model1 = dict(sigma_c2c=1.5, sigma_d2d=1.1, bound_mean=1.0,
                  sigma_bound=0.8, asym_down=0.05, sigma_asym=0.06,
                  noise_sigma=0.1)
    model2 = dict(sigma_c2c=1.5, sigma_d2d=1.1, bound_mean=1.0,
                  sigma_bound=0.8)
    model3 = dict(sigma_c2c=0.3, sigma_d2d=0.3, bound_mean=1.0,
                  sigma_bound=0.3, sigma_asym=0.02, noise_sigma=0.05)
    out += [
        _fixed_dw("fig4b.model1", note="all tolerances at threshold", **model1),
        _fixed_dw("fig4b.model2", note="C, D, E at threshold", **model2),
        _fixed_dw("fig4b.model3", note="co-optimized tolerances", **model3),
        # peripheral input bounds on top of the co-optimized model
        _fixed_dw("fig5b.curve1", alpha_hidden=3.0, **model3),
        _fixed_dw("fig5b.curve2", alpha_hidden=3.0, alpha_output=3.0, **model3),
        _fixed_dw("fig5b.curve3", alpha_hidden=12.0, alpha_output=12.0, **model3),
    ]
    return out


_CATALOG = None


def find(name: str) -> ExperimentSpec:
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = {s.name: s for s in catalog()}
    try:
        return replace(_CATALOG[name])
    except KeyError:
        raise UnknownExperimentError(
            f"{name!r} is not a catalog experiment; known names: "
            f"{', '.join(sorted(_CATALOG))}") from None


# -- flat config format ------------------------------------------------------

_FIELDS = {
    "mode": str, "lr_rule": str, "epochs": int, "samples_per_epoch": int,
    "bl": int, "dw_min_mean": float, "sigma_c2c": float, "sigma_d2d": float,
    "bound_mean": float, "sigma_bound": float, "asym_up": float,
    "asym_down": float, "sigma_asym": float, "k": float, "noise_sigma": float,
    "alpha_hidden": float, "alpha_output": float, "input_pulses": int,
    "note": str,
}


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else "inf"
    return str(v)


def to_config_text(spec: ExperimentSpec) -> str:
    lines = [f"name = {spec.name}"]
    for key, _ in _FIELDS.items():
        lines.append(f"{key} = {_fmt(getattr(spec, key))}")
    lines.append("layer_sizes = " + ",".join(str(n) for n in spec.layer_sizes))
    lines.append("seeds = " + ",".join(str(s) for s in spec.seeds))
    lines.append("schedule = " + ",".join(
        f"{a}:{b}:{_fmt(eta)}" for a, b, eta in spec.schedule))
    return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> ExperimentSpec:
    kv = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        kv[key] = val
    if "name" not in kv:
        raise ValueError("config must set a name")
    spec = ExperimentSpec(name=kv.pop("name"))
    for key, val in kv.items():
        if key == "layer_sizes":
            spec.layer_sizes = tuple(int(x) for x in val.split(","))
        elif key == "seeds":
            spec.seeds = tuple(int(x) for x in val.split(","))
        elif key == "schedule":
            spans = []
            for part in val.split(","):
                a, b, eta = part.split(":")
                spans.append((int(a), int(b), float(eta)))
            spec.schedule = tuple(spans)
        elif key in _FIELDS:
            typ = _FIELDS[key]
            setattr(spec, key, typ(val) if typ is not float else float(val))
        else:
            raise ValueError(f"unknown config key {key!r}")
    return spec


def load_config(path) -> ExperimentSpec:
    with open(path) as f:
        return parse_config_text(f.read())

"""Desk-scale simulator of DNN training on resistive cross-point arrays.

Reproduces the stochastic pulse-coincidence update rule, the device
non-ideality tolerance experiments on MNIST, and the circuit/system design
arithmetic for the accelerator tile.
"""

from .arrays import (DeviceArraySpec, DeviceArrayState, ReadoutConfig,
                     apply_coincidences, materialize, read_backward,
                     read_forward)
from .catalog import ExperimentSpec, catalog, find
from .harness import ResultLog, penalty_report, run_experiment
from .hwcalc import HwDerived, HwParams, derive
from .mnist import Dataset, load_dataset, parse_idx
from .network import LrSchedule, Network, NetworkConfig, TrainRun
from .streams import (StochasticStream, TranslatorConfig, coincidence_counts,
                      expected_update, stochastic_outer_update, translate)

__all__ = [
    "DeviceArraySpec", "DeviceArrayState", "ReadoutConfig",
    "apply_coincidences", "materialize", "read_backward", "read_forward",
    "ExperimentSpec", "catalog", "find", "ResultLog", "penalty_report",
    "run_experiment", "HwDerived", "HwParams", "derive", "Dataset",
    "load_dataset", "parse_idx", "LrSchedule", "Network", "NetworkConfig",
    "TrainRun", "StochasticStream", "TranslatorConfig", "coincidence_counts",
    "expected_update", "stochastic_outer_update", "translate",
]

__version__ = "0.1.0"

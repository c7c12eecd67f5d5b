"""Fault-tolerant collaborative DT execution: federated forecasting, pattern mining and simulation."""

__version__ = "0.1.0"

from .simkernel import SimConfig, run_experiment

__all__ = ["SimConfig", "run_experiment"]

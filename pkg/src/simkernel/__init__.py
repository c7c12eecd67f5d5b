"""Fault-tolerant execution simulator and its reliability metrics."""

from .experiment import CellError, ExperimentResult, cell_seed, cell_workload, run_cell, run_experiment
from .kernel import (
    EVENT_SCHEMA_VERSION,
    FORECAST_MODES,
    TABLE_COLUMNS,
    CellResult,
    FaultCause,
    FaultEvent,
    MigrationEvent,
    SimConfig,
    SimKernel,
    SimMetrics,
    server_pool,
)
from .reliability import (
    LedgerRatio,
    UndefinedAvailability,
    Utilization,
    availability,
    compute_mtbf,
    compute_mttr,
    power,
    resource_utilization,
)
from .workload import Workload, generate_workload

__all__ = [
    "EVENT_SCHEMA_VERSION",
    "FORECAST_MODES",
    "TABLE_COLUMNS",
    "CellError",
    "CellResult",
    "ExperimentResult",
    "FaultCause",
    "FaultEvent",
    "LedgerRatio",
    "MigrationEvent",
    "SimConfig",
    "SimKernel",
    "SimMetrics",
    "UndefinedAvailability",
    "Utilization",
    "Workload",
    "availability",
    "cell_seed",
    "cell_workload",
    "compute_mtbf",
    "compute_mttr",
    "generate_workload",
    "power",
    "resource_utilization",
    "run_cell",
    "run_experiment",
    "server_pool",
]

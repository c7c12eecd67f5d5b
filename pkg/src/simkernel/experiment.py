"""Experiment grid over application sizes, horizons and forecaster modes."""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from tqdm import tqdm

from ..patterns.tdtdb import TDTdb
from ..scheduler.placement import InvariantViolation
from .kernel import CellResult, SimConfig, SimKernel, SimMetrics
from .workload import Workload, generate_workload

logger = logging.getLogger(__name__)


class CellError(RuntimeError):
    """A grid cell failed; carries the cell coordinates."""

    def __init__(self, mode: str, app_size: int, horizon_min: int, cause: Exception):
        self.mode = mode
        self.app_size = app_size
        self.horizon_min = horizon_min
        super().__init__(
            f"Cell mode={mode} size={app_size} T={horizon_min} failed: {type(cause).__name__}: {cause}"
        )


@dataclass
class ExperimentResult:
    """Metric rows, event log and plot series of a whole grid."""

    metrics: list[SimMetrics] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    rounds: list[dict] = field(default_factory=list)
    losses: list[dict] = field(default_factory=list)
    tdtdbs: dict[tuple[str, int, int], TDTdb] = field(default_factory=dict)

    def rows(self) -> list[dict]:
        return [m.to_row() for m in self.metrics]

    def comparison_rows(self) -> list[dict]:
        """MTBF, MTTR and AV per mode for each cell."""
        return [
            {
                "mode": m.mode,
                "app_size": m.app_size,
                "horizon_min": m.horizon_min,
                "mtbf_min": m.mtbf_min,
                "mttr_min": m.mttr_min,
                "availability_pct": m.availability_pct,
            }
            for m in self.metrics
        ]


def cell_seed(seed: int, app_size: int, horizon_min: int) -> int:
    """Workload seed of a cell; shared by every mode so runs are paired."""
    return int(np.random.SeedSequence([seed, app_size, horizon_min]).generate_state(1)[0])


def cell_workload(config: SimConfig, app_size: int, horizon_min: int) -> Workload:
    return generate_workload(
        app_size=app_size,
        horizon_min=horizon_min,
        history_min=config.history_min,
        seed=cell_seed(config.seed, app_size, horizon_min),
        tick_min=config.tick_min,
        correlation=config.correlation,
        outlier_fraction=config.outlier_fraction,
        mips_per_pe=config.mips_per_pe,
    )


def run_cell(config: SimConfig, mode: str, app_size: int, horizon_min: int) -> CellResult:
    """Simulate one (mode, app_size, horizon) cell."""
    workload = cell_workload(config, app_size, horizon_min)
    kernel = SimKernel(config, workload, mode=mode, seed=cell_seed(config.seed, app_size, horizon_min))
    return kernel.run(horizon_min)


def run_experiment(config: Optional[SimConfig] = None, show_progress: bool = False) -> ExperimentResult:
    """
    Run every cell of the grid in mode, size, horizon order.

    Raises:
        InvariantViolation: re-raised with the cell coordinates prepended
        CellError: wrapping any other failure of a cell
    """
    config = config or SimConfig()
    cells = [
        (mode, size, horizon)
        for mode in config.modes
        for size in config.app_sizes
        for horizon in config.horizons
    ]
    result = ExperimentResult()
    for mode, size, horizon in tqdm(cells, desc="Simulating", disable=not show_progress, unit="cell"):
        try:
            cell = run_cell(config, mode, size, horizon)
        except InvariantViolation as e:
            raise InvariantViolation(f"mode={mode} size={size} T={horizon}: {e}") from e
        except (ValueError, RuntimeError) as e:
            raise CellError(mode, size, horizon, e) from e

        context = {"mode": mode, "app_size": size, "horizon_min": horizon}
        result.metrics.append(cell.metrics)
        result.events.extend({**context, **event} for event in cell.events)
        result.rounds.extend({**context, **row} for row in cell.rounds)
        result.losses.extend({**context, **row} for row in cell.losses)
        result.tdtdbs[(mode, size, horizon)] = cell.tdtdb
    return result

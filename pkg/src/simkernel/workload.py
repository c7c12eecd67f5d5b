"""Per-task usage workloads driving the simulator."""

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from ..domain.resources import ResourceVector
from ..domain.status import DTTask
from ..trace.synthetic import SyntheticTraceConfig, generate_trace

CPU, MEM = 0, 1


@dataclass
class Workload:
    """
    Utilization arrays plus nominal peak demand for each task.

    usage[task] has shape (history_ticks + ticks, 3) over (cpu, mem, disk);
    tick 0 of the simulation is row history_ticks.
    """

    tasks: list[DTTask]
    usage: dict[str, NDArray[np.float64]]
    history_ticks: int
    tick_min: int = 5
    _index: dict[str, DTTask] = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        self._index = {t.id: t for t in self.tasks}
        for task in self.tasks:
            if task.id not in self.usage:
                raise ValueError(f"No usage for task {task.id}")
            if len(self.usage[task.id]) < self.history_ticks:
                raise ValueError(f"Usage of {task.id} is shorter than the history")

    @property
    def task_ids(self) -> list[str]:
        return [t.id for t in self.tasks]

    @property
    def ticks(self) -> int:
        return min(len(u) for u in self.usage.values()) - self.history_ticks

    def nominal(self, task_id: str) -> ResourceVector:
        return self._index[task_id].demand

    def task(self, task_id: str) -> DTTask:
        return self._index[task_id]

    def observed(self, task_id: str, tick: int) -> NDArray[np.float64]:
        """Rows visible before simulation tick `tick`."""
        return self.usage[task_id][: self.history_ticks + tick]

    def utilization(self, task_id: str, tick: int) -> NDArray[np.float64]:
        return self.usage[task_id][self.history_ticks + tick]

    def to_demand(self, task_id: str, cpu_util: float, mem_util: float) -> ResourceVector:
        """Scale utilization fractions by the task's nominal peak."""
        nominal = self.nominal(task_id)
        cpu = max(float(cpu_util), 0.0)
        return ResourceVector(
            cpu_pe=nominal.cpu_pe * cpu,
            cpu_mips=nominal.cpu_mips * cpu,
            mem_gb=nominal.mem_gb * max(float(mem_util), 0.0),
        )

    def realized(self, task_id: str, tick: int) -> ResourceVector:
        row = self.utilization(task_id, tick)
        return self.to_demand(task_id, row[CPU], row[MEM])


def generate_workload(
    app_size: int,
    horizon_min: int,
    history_min: int,
    seed: int,
    tick_min: int = 5,
    correlation: float = 0.8,
    outlier_fraction: float = 0.2,
    mips_per_pe: float = 500.0,
) -> Workload:
    """
    Synthetic workload of app_size single-task clients.

    Nominal peaks are drawn per task: PE ~ U(0.4, 2.0), memory ~ U(0.2, 1.5)
    GB, MIPS = PE * mips_per_pe.
    """
    rng = np.random.default_rng(seed)
    duration = history_min + horizon_min
    trace = generate_trace(
        SyntheticTraceConfig(
            clients=app_size,
            tasks_per_client=1,
            duration_min=duration,
            correlation=correlation,
            seed=int(rng.integers(2**31)),
            sampling_interval_min=tick_min,
            outlier_clients=int(round(outlier_fraction * app_size)),
        )
    )
    tasks = []
    for task_id in sorted(trace.usage):
        pe = float(rng.uniform(0.4, 2.0))
        mem = float(rng.uniform(0.2, 1.5))
        tasks.append(
            DTTask(
                id=task_id,
                app_id="app",
                client_id=trace.client_assignment[task_id],
                demand=ResourceVector(cpu_pe=pe, cpu_mips=pe * mips_per_pe, mem_gb=mem),
            )
        )
    return Workload(
        tasks=tasks,
        usage=trace.usage,
        history_ticks=history_min // tick_min,
        tick_min=tick_min,
    )

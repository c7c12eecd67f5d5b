"""Synthetic GCW-shaped usage traces with controllable cross-client correlation."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from .parser import DEFAULT_SAMPLING_INTERVAL_MIN, UsageSample

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SyntheticTraceConfig:
    """Generator settings. correlation is the pairwise correlation of regular clients."""

    clients: int = 3
    tasks_per_client: int = 1
    duration_min: int = 480
    correlation: float = 0.8
    seed: int = 0
    sampling_interval_min: int = DEFAULT_SAMPLING_INTERVAL_MIN
    outlier_clients: int = 0
    amplitude: float = 0.2
    noise: float = 0.01

    def __post_init__(self):
        if self.clients < 1 or self.tasks_per_client < 1:
            raise ValueError("clients and tasks_per_client must be >= 1")
        if not 0.0 <= self.correlation <= 1.0:
            raise ValueError(f"correlation must be in [0, 1], got {self.correlation}")
        if self.duration_min % self.sampling_interval_min != 0:
            raise ValueError("duration_min must be a multiple of the sampling interval")
        if not 0 <= self.outlier_clients <= self.clients:
            raise ValueError("outlier_clients must be between 0 and clients")

    @property
    def length(self) -> int:
        return self.duration_min // self.sampling_interval_min


@dataclass
class SyntheticTrace:
    """Generated usage: (T, 3) arrays keyed by task id plus ownership."""

    usage: dict[str, NDArray[np.float64]]
    client_assignment: dict[str, str]
    outlier_clients: tuple[str, ...]
    sampling_interval_min: int

    def samples(self) -> list[UsageSample]:
        """Flatten to UsageSample rows sorted by (task_id, timestamp)."""
        rows = []
        for task_id in sorted(self.usage):
            values = self.usage[task_id]
            for t, (cpu, mem, disk) in enumerate(values):
                rows.append(
                    UsageSample(
                        timestamp=t * self.sampling_interval_min,
                        task_id=task_id,
                        cpu_util=float(cpu),
                        mem_util=float(mem),
                        disk_io=float(disk),
                    )
                )
        return rows


def task_name(index: int) -> str:
    return f"a{index + 1:03d}"


def client_name(index: int) -> str:
    return f"c{index + 1:03d}"


def _latent(rng: np.random.Generator, length: int, interval: int) -> NDArray[np.float64]:
    """Standardized periodic-plus-AR(1) signal."""
    t = np.arange(length) * interval
    slow = np.sin(2 * np.pi * t / rng.uniform(90, 150) + rng.uniform(0, 2 * np.pi))
    fast = 0.5 * np.sin(2 * np.pi * t / rng.uniform(30, 50) + rng.uniform(0, 2 * np.pi))
    ar = np.zeros(length)
    shocks = rng.normal(0.0, 0.3, size=length)
    for i in range(1, length):
        ar[i] = 0.8 * ar[i - 1] + shocks[i]
    signal = slow + fast + ar
    std = signal.std()
    return (signal - signal.mean()) / (std if std > 0 else 1.0)


def generate_trace(config: SyntheticTraceConfig) -> SyntheticTrace:
    """
    Generate per-task CPU/memory/disk utilization.

    Regular clients load a shared latent signal with weight sqrt(correlation),
    so any two of them correlate at `correlation`. The last `outlier_clients`
    clients follow their own signal with a memory-heavy profile.
    """
    rng = np.random.default_rng(config.seed)
    length = config.length
    interval = config.sampling_interval_min
    shared = _latent(rng, length, interval)
    loading = np.sqrt(config.correlation)
    first_outlier = config.clients - config.outlier_clients

    usage: dict[str, NDArray[np.float64]] = {}
    assignment: dict[str, str] = {}
    outliers = []
    task_index = 0
    for c in range(config.clients):
        client_id = client_name(c)
        is_outlier = c >= first_outlier
        if is_outlier:
            outliers.append(client_id)
        for _ in range(config.tasks_per_client):
            own = _latent(rng, length, interval)
            if is_outlier:
                z = own
                base_cpu, base_mem = rng.uniform(0.12, 0.2), rng.uniform(0.6, 0.7)
            else:
                z = loading * shared + np.sqrt(1.0 - config.correlation) * own
                base_cpu, base_mem = rng.uniform(0.45, 0.6), rng.uniform(0.25, 0.35)
            amp = config.amplitude * rng.uniform(0.8, 1.2)
            cpu = base_cpu + amp * z + rng.normal(0.0, config.noise, length)
            mem = base_mem + 0.6 * amp * z + rng.normal(0.0, config.noise, length)
            disk = 0.1 + 0.25 * amp * z + rng.normal(0.0, config.noise, length)
            values = np.clip(np.column_stack([cpu, mem, disk]), 0.0, 1.0)
            task_id = task_name(task_index)
            usage[task_id] = values
            assignment[task_id] = client_id
            task_index += 1

    logger.info(
        f"Generated {len(usage)} synthetic tasks over {length} samples "
        f"(correlation={config.correlation}, outliers={len(outliers)})"
    )
    return SyntheticTrace(
        usage=usage,
        client_assignment=assignment,
        outlier_clients=tuple(outliers),
        sampling_interval_min=interval,
    )


def correlated_pair_scenario(
    seed: int,
    duration_min: int = 480,
    correlation: float = 0.95,
    config: Optional[SyntheticTraceConfig] = None,
) -> SyntheticTrace:
    """Three clients: a correlated pair plus one outlier."""
    base = config or SyntheticTraceConfig()
    return generate_trace(
        SyntheticTraceConfig(
            clients=3,
            tasks_per_client=1,
            duration_min=duration_min,
            correlation=correlation,
            seed=seed,
            sampling_interval_min=base.sampling_interval_min,
            outlier_clients=1,
            amplitude=base.amplitude,
            noise=base.noise,
        )
    )

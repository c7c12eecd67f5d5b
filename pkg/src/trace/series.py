"""Per-client usage series with gap imputation."""

import logging
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

from .parser import DEFAULT_SAMPLING_INTERVAL_MIN, TraceError, UsageSample

logger = logging.getLogger(__name__)

DEFAULT_MAX_CARRY = 3
FEATURES = ("cpu_util", "mem_util", "disk_io")


class UnassignedTask(TraceError):
    """A task has no owning client."""

    def __init__(self, task_id: str):
        self.task_id = task_id
        super().__init__(f"Task {task_id} has no client assignment")


@dataclass(frozen=True)
class UsageSeries:
    """Gap-free, time-ordered usage samples of one client."""

    client_id: str
    samples: tuple[UsageSample, ...]
    sampling_interval_min: int = DEFAULT_SAMPLING_INTERVAL_MIN
    imputed_count: int = 0
    segment: int = 0

    def __len__(self) -> int:
        return len(self.samples)

    def as_array(self, features: Sequence[str] = FEATURES) -> NDArray[np.float64]:
        """Samples as a (T, len(features)) array."""
        return np.array(
            [[getattr(s, f) for f in features] for s in self.samples],
            dtype=np.float64,
        ).reshape(len(self.samples), len(features))

    @property
    def timestamps(self) -> list[int]:
        return [s.timestamp for s in self.samples]


def _merge_client_samples(
    client_id: str,
    samples: list[UsageSample],
) -> list[UsageSample]:
    """One sample per timestamp; several tasks are averaged under the client id."""
    task_ids = {s.task_id for s in samples}
    if len(task_ids) == 1:
        return sorted(samples, key=lambda s: s.timestamp)

    by_ts: dict[int, list[UsageSample]] = defaultdict(list)
    for s in samples:
        by_ts[s.timestamp].append(s)
    merged = []
    for ts in sorted(by_ts):
        group = by_ts[ts]
        merged.append(
            UsageSample(
                timestamp=ts,
                task_id=client_id,
                cpu_util=float(np.mean([s.cpu_util for s in group])),
                mem_util=float(np.mean([s.mem_util for s in group])),
                disk_io=float(np.mean([s.disk_io for s in group])),
            )
        )
    return merged


def _fill_gaps(
    client_id: str,
    samples: list[UsageSample],
    interval: int,
    max_carry: int,
) -> list[UsageSeries]:
    segments: list[UsageSeries] = []
    current: list[UsageSample] = []
    imputed = 0

    def close_segment():
        if current:
            segments.append(
                UsageSeries(
                    client_id=client_id,
                    samples=tuple(current),
                    sampling_interval_min=interval,
                    imputed_count=imputed,
                    segment=len(segments),
                )
            )

    for sample in samples:
        if current:
            prev = current[-1]
            missing = (sample.timestamp - prev.timestamp) // interval - 1
            if missing > max_carry:
                logger.warning(
                    f"GAP_SPLIT: client {client_id} has {missing} missing samples "
                    f"after t={prev.timestamp}; starting a new segment"
                )
                close_segment()
                current = []
                imputed = 0
            elif missing > 0:
                for k in range(1, missing + 1):
                    current.append(replace(prev, timestamp=prev.timestamp + k * interval))
                imputed += missing
        current.append(sample)
    close_segment()
    return segments


def build_series(
    samples: list[UsageSample],
    client_assignment: Mapping[str, str],
    sampling_interval_min: int = DEFAULT_SAMPLING_INTERVAL_MIN,
    max_carry: int = DEFAULT_MAX_CARRY,
) -> list[UsageSeries]:
    """
    Group samples into one series per client.

    Gaps of up to max_carry intervals are filled by carrying the last
    observation forward; longer gaps split the series into segments.

    Args:
        samples: Parsed usage samples
        client_assignment: task_id -> client_id
        sampling_interval_min: Sampling interval in minutes
        max_carry: Longest run of imputed samples allowed

    Returns:
        Series ordered by (client_id, segment)

    Raises:
        UnassignedTask: if a task has no client
    """
    by_client: dict[str, list[UsageSample]] = defaultdict(list)
    for s in samples:
        if s.task_id not in client_assignment:
            raise UnassignedTask(s.task_id)
        by_client[client_assignment[s.task_id]].append(s)

    series: list[UsageSeries] = []
    total_imputed = 0
    for client_id in sorted(by_client):
        merged = _merge_client_samples(client_id, by_client[client_id])
        for segment in _fill_gaps(client_id, merged, sampling_interval_min, max_carry):
            total_imputed += segment.imputed_count
            series.append(segment)

    logger.info(f"Built {len(series)} series, {total_imputed} imputed samples")
    return series

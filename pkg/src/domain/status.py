"""Fault-proneness classification of DT tasks."""

import math
from dataclasses import dataclass, field
from enum import Enum

from .resources import ALL_DIMS, ResourceVector

# Relative tolerance for the equality branch, on utilization normalized by
# available capacity.
EPS_EQ = 1e-9

DEFAULT_THRESHOLD_FRACTION = 0.9


class ThresholdExceedsCapacity(ValueError):
    """Threshold is not strictly below the available capacity."""

    def __init__(self, dimension: str, threshold: float, available: float):
        self.dimension = dimension
        self.threshold = threshold
        self.available = available
        super().__init__(
            f"Threshold {threshold} >= available {available} in dimension {dimension}"
        )


class FaultStatus(Enum):
    """Per-epoch fault status of a task, least severe first."""

    LEAST_FAULT_PRONE = "least_fault_prone"
    MILD_FAULT_PRONE = "mild_fault_prone"
    HIGHLY_FAULT_PRONE = "highly_fault_prone"

    @property
    def severity(self) -> int:
        return list(FaultStatus).index(self)

    @property
    def is_fault_prone(self) -> bool:
        return self is not FaultStatus.LEAST_FAULT_PRONE


@dataclass(frozen=True)
class DTTask:
    """A collaborative DT task component owned by one client."""

    id: str
    app_id: str
    client_id: str
    demand: ResourceVector
    demand_threshold: ResourceVector = field(default_factory=ResourceVector)
    status: FaultStatus = FaultStatus.LEAST_FAULT_PRONE


def classify_dimension(predicted: float, threshold: float, available: float) -> FaultStatus:
    """
    Classify one resource dimension.

    predicted > threshold -> highly, predicted == threshold (within EPS_EQ) -> mild,
    otherwise least. Requires threshold < available.
    """
    if not threshold < available:
        raise ThresholdExceedsCapacity("scalar", threshold, available)

    u_pred = predicted / available
    u_thr = threshold / available
    if math.isclose(u_pred, u_thr, rel_tol=EPS_EQ, abs_tol=0.0):
        return FaultStatus.MILD_FAULT_PRONE
    if u_pred > u_thr:
        return FaultStatus.HIGHLY_FAULT_PRONE
    return FaultStatus.LEAST_FAULT_PRONE


def classify_status(
    predicted: ResourceVector,
    threshold: ResourceVector,
    available: ResourceVector,
) -> FaultStatus:
    """
    Fault status of a task from predicted usage against its VM.

    Each dimension is classified on its own; the most severe wins.

    Raises:
        ThresholdExceedsCapacity: if threshold >= available in any dimension
    """
    for dim in ALL_DIMS:
        if not getattr(threshold, dim) < getattr(available, dim):
            raise ThresholdExceedsCapacity(
                dim, getattr(threshold, dim), getattr(available, dim)
            )

    worst = FaultStatus.LEAST_FAULT_PRONE
    for dim in ALL_DIMS:
        status = classify_dimension(
            getattr(predicted, dim), getattr(threshold, dim), getattr(available, dim)
        )
        if status.severity > worst.severity:
            worst = status
    return worst


def default_threshold(
    available: ResourceVector,
    fraction: float = DEFAULT_THRESHOLD_FRACTION,
) -> ResourceVector:
    """R(Phi*) as a fraction of available capacity."""
    if not 0 < fraction < 1:
        raise ValueError(f"Threshold fraction must be in (0, 1), got {fraction}")
    return available.scale(fraction)

"""Resource quantities shared by tasks, VMs and servers."""

from dataclasses import dataclass, fields
from typing import Iterable

import numpy as np
from numpy.typing import NDArray

# Dimensions checked by the placement constraints. MIPS is carried for
# workload scaling only.
PLACEMENT_DIMS = ("cpu_pe", "mem_gb")
ALL_DIMS = ("cpu_pe", "cpu_mips", "mem_gb")


@dataclass(frozen=True)
class ResourceVector:
    """Per-resource demand or capacity (CPU PE, CPU MIPS, memory GB)."""

    cpu_pe: float = 0.0
    cpu_mips: float = 0.0
    mem_gb: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{f.name} must be finite and >= 0, got {value}")

    def __add__(self, other: "ResourceVector") -> "ResourceVector":
        return ResourceVector(
            cpu_pe=self.cpu_pe + other.cpu_pe,
            cpu_mips=self.cpu_mips + other.cpu_mips,
            mem_gb=self.mem_gb + other.mem_gb,
        )

    def __le__(self, other: "ResourceVector") -> bool:
        return all(a <= b for a, b in zip(self.as_tuple(), other.as_tuple()))

    def __lt__(self, other: "ResourceVector") -> bool:
        return all(a < b for a, b in zip(self.as_tuple(), other.as_tuple()))

    def scale(self, factor: float) -> "ResourceVector":
        """Multiply every component by a non-negative factor."""
        return ResourceVector(
            cpu_pe=self.cpu_pe * factor,
            cpu_mips=self.cpu_mips * factor,
            mem_gb=self.mem_gb * factor,
        )

    def fits_within(self, capacity: "ResourceVector") -> bool:
        """Placement check on PE and memory."""
        return all(getattr(self, d) <= getattr(capacity, d) for d in PLACEMENT_DIMS)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.cpu_pe, self.cpu_mips, self.mem_gb)

    def as_array(self, dims: Iterable[str] = ALL_DIMS) -> NDArray[np.float64]:
        return np.array([getattr(self, d) for d in dims], dtype=np.float64)

    @classmethod
    def from_array(
        cls,
        values: NDArray[np.float64],
        dims: Iterable[str] = ALL_DIMS,
    ) -> "ResourceVector":
        return cls(**{d: float(v) for d, v in zip(dims, values)})

    @classmethod
    def sum(cls, vectors: Iterable["ResourceVector"]) -> "ResourceVector":
        total = cls()
        for v in vectors:
            total = total + v
        return total

    def to_dict(self) -> dict:
        return {"cpu_pe": self.cpu_pe, "cpu_mips": self.cpu_mips, "mem_gb": self.mem_gb}

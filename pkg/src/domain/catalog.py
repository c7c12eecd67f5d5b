"""Hardware catalogs for servers and VM tiers."""

import json
import logging
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Optional

from .resources import ResourceVector

logger = logging.getLogger(__name__)

CATALOG_SCHEMA_VERSION = 1


class VMTier(Enum):
    """VM size tiers, smallest first."""

    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"
    XLARGE = "xlarge"

    @property
    def rank(self) -> int:
        return list(VMTier).index(self)

    def next_up(self) -> Optional["VMTier"]:
        tiers = list(VMTier)
        return tiers[self.rank + 1] if self.rank + 1 < len(tiers) else None


@dataclass(frozen=True)
class ServerSpec:
    """Physical server with its capacity and power envelope."""

    id: str
    capacity: ResourceVector
    pw_max: float
    pw_min_idle: float

    def __post_init__(self):
        if not (self.pw_max >= self.pw_min_idle >= 0):
            raise ValueError(
                f"Server {self.id}: need pw_max >= pw_min_idle >= 0, "
                f"got {self.pw_max} / {self.pw_min_idle}"
            )
        if not self.capacity.cpu_pe > 0 or not self.capacity.mem_gb > 0:
            raise ValueError(f"Server {self.id}: capacity must be strictly positive")

    def instance(self, instance_id: str) -> "ServerSpec":
        """Copy of this catalog row under a new identifier."""
        return replace(self, id=instance_id)


@dataclass(frozen=True)
class VMSpec:
    """VM of a given tier. Catalog rows use the tier name as id."""

    id: str
    tier: VMTier
    capacity: ResourceVector

    def instance(self, instance_id: str) -> "VMSpec":
        return replace(self, id=instance_id)


_SERVER_ROWS = (
    ("S1", 2, 2660, 4, 135.0, 93.7),
    ("S2", 4, 3067, 8, 113.0, 42.3),
    ("S3", 12, 3067, 16, 222.0, 58.4),
)

_VM_ROWS = (
    (VMTier.SMALL, 1, 500, 0.5),
    (VMTier.MEDIUM, 2, 1000, 1),
    (VMTier.LARGE, 3, 1500, 2),
    (VMTier.XLARGE, 4, 2000, 3),
)


def catalog_servers() -> list[ServerSpec]:
    """The three server configurations S1-S3."""
    return [
        ServerSpec(
            id=sid,
            capacity=ResourceVector(cpu_pe=pe, cpu_mips=mips, mem_gb=mem),
            pw_max=pw_max,
            pw_min_idle=pw_idle,
        )
        for sid, pe, mips, mem, pw_max, pw_idle in _SERVER_ROWS
    ]


def catalog_vms() -> list[VMSpec]:
    """The four VM tiers, smallest first."""
    return [
        VMSpec(
            id=tier.value,
            tier=tier,
            capacity=ResourceVector(cpu_pe=pe, cpu_mips=mips, mem_gb=mem),
        )
        for tier, pe, mips, mem in _VM_ROWS
    ]


def vm_for_tier(tier: VMTier, vms: Optional[list[VMSpec]] = None) -> VMSpec:
    """Catalog row for a tier."""
    for vm in vms or catalog_vms():
        if vm.tier == tier:
            return vm
    raise ValueError(f"Unknown VM tier: {tier}")


def smallest_fitting_tier(
    demand: ResourceVector,
    vms: Optional[list[VMSpec]] = None,
) -> Optional[VMSpec]:
    """Smallest catalog VM whose capacity holds the demand, or None."""
    for vm in sorted(vms or catalog_vms(), key=lambda v: v.tier.rank):
        if demand.fits_within(vm.capacity):
            return vm
    return None


def save_catalog(
    path: Path,
    servers: Optional[list[ServerSpec]] = None,
    vms: Optional[list[VMSpec]] = None,
) -> None:
    """Write a hardware catalog JSON file."""
    servers = servers if servers is not None else catalog_servers()
    vms = vms if vms is not None else catalog_vms()
    data = {
        "schema_version": CATALOG_SCHEMA_VERSION,
        "servers": [
            {
                "id": s.id,
                **s.capacity.to_dict(),
                "pw_max": s.pw_max,
                "pw_min_idle": s.pw_min_idle,
            }
            for s in servers
        ],
        "vms": [
            {"id": v.id, "tier": v.tier.value, **v.capacity.to_dict()}
            for v in vms
        ],
    }
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True), encoding="utf-8")


def load_catalog(path: Path) -> tuple[list[ServerSpec], list[VMSpec]]:
    """
    Read a hardware catalog JSON file.

    Returns:
        (servers, vms); VM rows must keep tiers strictly ordered by capacity.
    """
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    version = data.get("schema_version")
    if version != CATALOG_SCHEMA_VERSION:
        raise ValueError(f"Unsupported catalog schema version: {version}")

    def _capacity(row: dict) -> ResourceVector:
        return ResourceVector(
            cpu_pe=float(row["cpu_pe"]),
            cpu_mips=float(row["cpu_mips"]),
            mem_gb=float(row["mem_gb"]),
        )

    servers = [
        ServerSpec(
            id=row["id"],
            capacity=_capacity(row),
            pw_max=float(row["pw_max"]),
            pw_min_idle=float(row["pw_min_idle"]),
        )
        for row in data["servers"]
    ]
    vms = sorted(
        (
            VMSpec(id=row["id"], tier=VMTier(row["tier"]), capacity=_capacity(row))
            for row in data["vms"]
        ),
        key=lambda v: v.tier.rank,
    )
    for smaller, larger in zip(vms, vms[1:]):
        if not smaller.capacity < larger.capacity:
            raise ValueError(
                f"VM tiers must be strictly ordered by capacity: "
                f"{smaller.id} vs {larger.id}"
            )
    logger.info(f"Loaded catalog from {path}: {len(servers)} servers, {len(vms)} VM tiers")
    return servers, vms

"""Core value types, hardware catalogs and the fault-status classifier."""

from .resources import ResourceVector, PLACEMENT_DIMS, ALL_DIMS
from .catalog import (
    ServerSpec,
    VMSpec,
    VMTier,
    catalog_servers,
    catalog_vms,
    vm_for_tier,
    smallest_fitting_tier,
    load_catalog,
    save_catalog,
)
from .status import (
    DTTask,
    FaultStatus,
    ThresholdExceedsCapacity,
    classify_dimension,
    classify_status,
    default_threshold,
)

__all__ = [
    "ResourceVector",
    "PLACEMENT_DIMS",
    "ALL_DIMS",
    "ServerSpec",
    "VMSpec",
    "VMTier",
    "catalog_servers",
    "catalog_vms",
    "vm_for_tier",
    "smallest_fitting_tier",
    "load_catalog",
    "save_catalog",
    "DTTask",
    "FaultStatus",
    "ThresholdExceedsCapacity",
    "classify_dimension",
    "classify_status",
    "default_threshold",
]

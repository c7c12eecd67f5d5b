"""Placement, MVP replication and pattern-guided scheduling."""

from .placement import (
    PlacementState,
    PlacementDelta,
    InsufficientCapacity,
    InvariantViolation,
    fits,
    ffd_assign,
    first_fit,
    place_vms,
    provision_vm,
)
from .replication import (
    MVPFailure,
    ReplicaPlan,
    EvenVersionCount,
    MVP_MODES,
    mvp_failure,
    plan_replicas,
)
from .guided import pattern_guided_place

__all__ = [
    "PlacementState",
    "PlacementDelta",
    "InsufficientCapacity",
    "InvariantViolation",
    "fits",
    "ffd_assign",
    "first_fit",
    "place_vms",
    "provision_vm",
    "MVPFailure",
    "ReplicaPlan",
    "EvenVersionCount",
    "MVP_MODES",
    "mvp_failure",
    "plan_replicas",
    "pattern_guided_place",
]

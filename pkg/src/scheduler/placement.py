"""Task-to-VM and VM-to-server placement with capacity validation."""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional

from ..domain.catalog import ServerSpec, VMSpec, VMTier, smallest_fitting_tier
from ..domain.resources import PLACEMENT_DIMS, ResourceVector
from ..domain.status import DTTask

logger = logging.getLogger(__name__)

CAPACITY_EPS = 1e-9


class InsufficientCapacity(ValueError):
    """A VM fits no server even after activating every server."""

    def __init__(self, vm_id: str, capacity: ResourceVector):
        self.vm_id = vm_id
        super().__init__(f"VM {vm_id} ({capacity.to_dict()}) fits no available server")


class InvariantViolation(RuntimeError):
    """A capacity or assignment constraint does not hold."""


def fits(demand: ResourceVector, free: ResourceVector) -> bool:
    """PE and memory of demand fit in free, within CAPACITY_EPS."""
    return all(getattr(demand, d) <= getattr(free, d) + CAPACITY_EPS for d in PLACEMENT_DIMS)


def _minus(a: ResourceVector, b: ResourceVector) -> ResourceVector:
    return ResourceVector(
        cpu_pe=max(a.cpu_pe - b.cpu_pe, 0.0),
        cpu_mips=max(a.cpu_mips - b.cpu_mips, 0.0),
        mem_gb=max(a.mem_gb - b.mem_gb, 0.0),
    )


def bin_order(vm: VMSpec) -> tuple:
    """Smallest-first bin order: ascending capacity (PE, memory), then id."""
    return (vm.capacity.cpu_pe, vm.capacity.mem_gb, vm.id)


def task_order(task: DTTask) -> tuple:
    """Decreasing demand (PE, memory), then ascending id."""
    return (-task.demand.cpu_pe, -task.demand.mem_gb, task.id)


@dataclass
class PlacementDelta:
    """Task assignments from one placement call plus the tasks left over."""

    assignments: dict[str, str] = field(default_factory=dict)
    unplaced: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.assignments or self.unplaced)


class PlacementState:
    """
    Owner of the task->VM (upsilon) and VM->server (omega) assignments.

    Every mutation checks the capacity constraints for the VM or server it
    touches; validate() re-checks all of them.
    """

    def __init__(self, servers: Iterable[ServerSpec] = ()):
        self.servers: dict[str, ServerSpec] = {s.id: s for s in servers}
        self.vms: dict[str, VMSpec] = {}
        self.vm_to_server: dict[str, str] = {}
        self.task_to_vm: dict[str, str] = {}
        self.task_demand: dict[str, ResourceVector] = {}
        self.replica_groups: dict[str, list[str]] = {}
        self._vm_counter = 0

    # -- queries ---------------------------------------------------------

    def tasks_on_vm(self, vm_id: str) -> list[str]:
        return sorted(t for t, v in self.task_to_vm.items() if v == vm_id)

    def vms_on_server(self, server_id: str) -> list[str]:
        return sorted(v for v, s in self.vm_to_server.items() if s == server_id)

    def tasks_on_server(self, server_id: str) -> list[str]:
        return sorted(t for t, v in self.task_to_vm.items() if self.vm_to_server[v] == server_id)

    def server_of_task(self, task_id: str) -> Optional[str]:
        vm_id = self.task_to_vm.get(task_id)
        return self.vm_to_server[vm_id] if vm_id is not None else None

    @property
    def active_servers(self) -> list[str]:
        return sorted(set(self.vm_to_server.values()))

    def vm_used(self, vm_id: str) -> ResourceVector:
        return ResourceVector.sum(self.task_demand[t] for t in self.tasks_on_vm(vm_id))

    def vm_free(self, vm_id: str) -> ResourceVector:
        return _minus(self.vms[vm_id].capacity, self.vm_used(vm_id))

    def server_used(self, server_id: str) -> ResourceVector:
        return ResourceVector.sum(self.vms[v].capacity for v in self.vms_on_server(server_id))

    def server_free(self, server_id: str) -> ResourceVector:
        return _minus(self.servers[server_id].capacity, self.server_used(server_id))

    def free_capacities(self) -> dict[str, ResourceVector]:
        return {v: self.vm_free(v) for v in self.vms}

    # -- mutations -------------------------------------------------------

    def next_vm_id(self, vm: VMSpec) -> str:
        self._vm_counter += 1
        return f"vm{self._vm_counter:04d}-{vm.tier.value}"

    def deploy_vm(self, vm: VMSpec, server_id: str) -> None:
        if vm.id in self.vms:
            raise InvariantViolation(f"VM {vm.id} is already deployed")
        if not fits(vm.capacity, self.server_free(server_id)):
            raise InvariantViolation(f"VM {vm.id} does not fit on server {server_id}")
        self.vms[vm.id] = vm
        self.vm_to_server[vm.id] = server_id

    def remove_vm(self, vm_id: str) -> None:
        if self.tasks_on_vm(vm_id):
            raise InvariantViolation(f"VM {vm_id} still hosts tasks")
        del self.vms[vm_id]
        del self.vm_to_server[vm_id]

    def assign(self, task_id: str, demand: ResourceVector, vm_id: str) -> None:
        if task_id in self.task_to_vm:
            raise InvariantViolation(f"Task {task_id} is already assigned to {self.task_to_vm[task_id]}")
        if not fits(demand, self.vm_free(vm_id)):
            raise InvariantViolation(f"Task {task_id} does not fit on VM {vm_id}")
        self.task_to_vm[task_id] = vm_id
        self.task_demand[task_id] = demand

    def unassign(self, task_id: str) -> Optional[str]:
        self.task_demand.pop(task_id, None)
        return self.task_to_vm.pop(task_id, None)

    def set_demand(self, task_id: str, demand: ResourceVector) -> None:
        """Replace a reservation in place; the caller migrates if it no longer fits."""
        self.task_demand[task_id] = demand

    def apply(self, delta: PlacementDelta, demands: dict[str, ResourceVector]) -> None:
        for task_id, vm_id in delta.assignments.items():
            self.assign(task_id, demands[task_id], vm_id)

    def release_empty_vms(self) -> list[str]:
        """Remove VMs that host nothing; returns their ids."""
        empty = [v for v in sorted(self.vms) if not self.tasks_on_vm(v)]
        for vm_id in empty:
            self.remove_vm(vm_id)
        return empty

    # -- checks and export ----------------------------------------------

    def validate(self) -> None:
        """
        Check every capacity constraint.

        Raises:
            InvariantViolation: listing the first offending VM or server
        """
        for task_id, vm_id in self.task_to_vm.items():
            if vm_id not in self.vms:
                raise InvariantViolation(f"Task {task_id} assigned to unknown VM {vm_id}")
        for vm_id, vm in self.vms.items():
            if self.vm_to_server.get(vm_id) not in self.servers:
                raise InvariantViolation(f"VM {vm_id} is not on a known server")
            used = self.vm_used(vm_id)
            if not fits(used, vm.capacity):
                raise InvariantViolation(
                    f"VM {vm_id} over capacity: {used.to_dict()} > {vm.capacity.to_dict()}"
                )
        for server_id in self.active_servers:
            used = self.server_used(server_id)
            cap = self.servers[server_id].capacity
            if not fits(used, cap):
                raise InvariantViolation(
                    f"Server {server_id} over capacity: {used.to_dict()} > {cap.to_dict()}"
                )
        for task_id, versions in self.replica_groups.items():
            if len(versions) % 2 == 0:
                raise InvariantViolation(f"Task {task_id} has an even version count {len(versions)}")

    def copy(self) -> "PlacementState":
        clone = PlacementState(self.servers.values())
        clone.vms = dict(self.vms)
        clone.vm_to_server = dict(self.vm_to_server)
        clone.task_to_vm = dict(self.task_to_vm)
        clone.task_demand = dict(self.task_demand)
        clone.replica_groups = {k: list(v) for k, v in self.replica_groups.items()}
        clone._vm_counter = self._vm_counter
        return clone

    def to_dict(self) -> dict:
        """upsilon (tasks x VMs) and omega (VMs x servers) 0/1 matrices plus replica groups."""
        tasks = sorted(self.task_to_vm)
        vms = sorted(self.vms)
        servers = sorted(self.servers)
        return {
            "tasks": tasks,
            "vms": vms,
            "servers": servers,
            "upsilon": [[int(self.task_to_vm[t] == v) for v in vms] for t in tasks],
            "omega": [[int(self.vm_to_server[v] == s) for s in servers] for v in vms],
            "replica_groups": {k: list(v) for k, v in sorted(self.replica_groups.items())},
        }

    def save_json(self, path: Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)


def first_fit(
    tasks: list[DTTask],
    bins: list[VMSpec],
    free: dict[str, ResourceVector],
    candidate_order: Optional[Callable[[DTTask, list[VMSpec], PlacementDelta], list[VMSpec]]] = None,
) -> PlacementDelta:
    """
    First-fit decreasing over the bins in the order given.

    candidate_order may reorder the bins per task; it never adds or drops
    candidates, so feasibility matches the plain order.
    """
    free = dict(free)
    ordered_bins = list(bins)
    delta = PlacementDelta()
    for task in sorted(tasks, key=task_order):
        candidates = candidate_order(task, ordered_bins, delta) if candidate_order else ordered_bins
        for vm in candidates:
            if fits(task.demand, free[vm.id]):
                delta.assignments[task.id] = vm.id
                free[vm.id] = _minus(free[vm.id], task.demand)
                break
        else:
            delta.unplaced.append(task.id)
    return delta


def ffd_assign(
    tasks: list[DTTask],
    vms: list[VMSpec],
    free: Optional[dict[str, ResourceVector]] = None,
) -> PlacementDelta:
    """
    Assign tasks to VMs by First-Fit Decreasing.

    Tasks are taken in decreasing demand (PE, memory, id); each goes to the
    first VM in `vms` that holds it. Tasks that fit nowhere are listed in
    `unplaced`.

    Args:
        tasks: Tasks to place
        vms: Candidate VMs, in the order they are tried
        free: Free capacity per VM id (default: each VM's full capacity)
    """
    free = free if free is not None else {vm.id: vm.capacity for vm in vms}
    delta = first_fit(tasks, vms, free)
    for task_id in delta.unplaced:
        logger.warning(f"UNPLACED_TASK: {task_id} fits no candidate VM")
    return delta


def place_vms(
    vms: list[VMSpec],
    servers: list[ServerSpec],
    state: Optional[PlacementState] = None,
) -> dict[str, str]:
    """
    First-fit decreasing of VMs onto servers.

    Active servers are tried first; a new server is activated, in the given
    order, only when no active one fits.

    Raises:
        InsufficientCapacity: if a VM fits no server
    """
    state = state if state is not None else PlacementState(servers)
    for server in servers:
        state.servers.setdefault(server.id, server)

    mapping: dict[str, str] = {}
    order = [s.id for s in servers]
    for vm in sorted(vms, key=lambda v: (-v.capacity.cpu_pe, -v.capacity.mem_gb, v.id)):
        active = [s for s in order if s in state.active_servers]
        inactive = [s for s in order if s not in state.active_servers]
        for server_id in active + inactive:
            if fits(vm.capacity, state.server_free(server_id)):
                state.deploy_vm(vm, server_id)
                mapping[vm.id] = server_id
                break
        else:
            raise InsufficientCapacity(vm.id, vm.capacity)
    return mapping


def provision_vm(
    state: PlacementState,
    demand: ResourceVector,
    vm_catalog: list[VMSpec],
    avoid_servers: Iterable[str] = (),
    min_tier: Optional[VMTier] = None,
) -> Optional[str]:
    """
    Deploy the smallest VM tier, no smaller than min_tier, that holds the demand.

    Active servers outside avoid_servers are tried first, then inactive ones,
    then the avoided servers. Returns the new VM id or None.
    """
    eligible = [v for v in vm_catalog if min_tier is None or v.tier.rank >= min_tier.rank]
    tier = smallest_fitting_tier(demand, eligible) if eligible else None
    if tier is None:
        return None
    avoid = set(avoid_servers)
    active = state.active_servers
    all_servers = sorted(state.servers)
    preferred = (
        [s for s in active if s not in avoid]
        + [s for s in all_servers if s not in active and s not in avoid]
        + [s for s in all_servers if s in avoid]
    )
    for server_id in preferred:
        if fits(tier.capacity, state.server_free(server_id)):
            vm = tier.instance(state.next_vm_id(tier))
            state.deploy_vm(vm, server_id)
            return vm.id
    return None

"""Pattern-guided first-fit placement with replica anti-affinity."""

import logging
from typing import Iterable, Optional

from ..domain.catalog import VMSpec
from ..domain.status import DTTask
from ..patterns.knowledge import PatternKnowledge
from .placement import PlacementDelta, PlacementState, first_fit

logger = logging.getLogger(__name__)


def _server_groups(
    state: PlacementState,
    delta: PlacementDelta,
) -> dict[str, set[str]]:
    groups: dict[str, set[str]] = {s: set(state.tasks_on_server(s)) for s in state.active_servers}
    for task_id, vm_id in delta.assignments.items():
        groups.setdefault(state.vm_to_server[vm_id], set()).add(task_id)
    return groups


def _guidance_rank(task_id: str, group: set[str], knowledge: PatternKnowledge) -> int:
    hypothetical = group | {task_id}
    if any(task_id in p and p <= hypothetical for p in knowledge.nf_itemsets):
        return 2
    if any(task_id in p and p <= hypothetical for p in knowledge.sf_itemsets):
        return 0
    return 1


def pattern_guided_place(
    tasks: list[DTTask],
    state: PlacementState,
    knowledge: Optional[PatternKnowledge],
    vm_ids: Optional[Iterable[str]] = None,
    avoid_servers: Optional[dict[str, set[str]]] = None,
) -> PlacementDelta:
    """
    First-fit decreasing with candidates reordered by mined patterns.

    For each task, every candidate VM gets the co-residency group it would
    join on its server. Candidates completing a supportive pattern come
    first, those completing a non-supportive pattern last, the rest keep the
    plain first-fit order. With no matching pattern the result equals
    ffd_assign on the same VMs.

    Args:
        tasks: Tasks to place
        state: Current placement (VMs, servers and residents)
        knowledge: Nf/Sf patterns, or None for plain first-fit
        vm_ids: Candidate VMs (default: every deployed VM)
        avoid_servers: task id -> servers to try last (replica anti-affinity)
    """
    candidates = [state.vms[v] for v in (vm_ids if vm_ids is not None else state.vms)]
    free = {vm.id: state.vm_free(vm.id) for vm in candidates}
    avoid_servers = avoid_servers or {}

    def order(task: DTTask, bins: list[VMSpec], delta: PlacementDelta) -> list[VMSpec]:
        groups = _server_groups(state, delta)
        avoided = avoid_servers.get(task.id, set())

        def key(item: tuple[int, VMSpec]) -> tuple:
            position, vm = item
            server_id = state.vm_to_server[vm.id]
            rank = 1
            if knowledge is not None:
                rank = _guidance_rank(task.id, groups.get(server_id, set()), knowledge)
            return (server_id in avoided, rank, position)

        return [vm for _, vm in sorted(enumerate(bins), key=key)]

    delta = first_fit(tasks, candidates, free, order)
    for task_id in delta.unplaced:
        logger.debug(f"No existing VM holds {task_id}")
    return delta


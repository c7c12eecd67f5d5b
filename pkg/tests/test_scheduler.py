"""Unit tests for placement, MVP replica planning and guided placement."""

import numpy as np
import pytest

from src.domain.catalog import VMTier, catalog_servers, catalog_vms, vm_for_tier
from src.domain.resources import ResourceVector
from src.domain.status import DTTask, FaultStatus
from src.patterns.knowledge import PatternKnowledge
from src.patterns.prefixspan import SequencePattern
from src.scheduler.guided import pattern_guided_place
from src.scheduler.placement import (
    InsufficientCapacity,
    InvariantViolation,
    PlacementState,
    ffd_assign,
    fits,
    place_vms,
    provision_vm,
)
from src.scheduler.replication import EvenVersionCount, mvp_failure, plan_replicas


def s3(index: int = 1):
    return catalog_servers()[2].instance(f"S3-{index:03d}")


def task(task_id: str, pe: float, mem: float = 0.1, status=FaultStatus.LEAST_FAULT_PRONE) -> DTTask:
    return DTTask(
        id=task_id,
        app_id="app",
        client_id="c001",
        demand=ResourceVector(cpu_pe=pe, cpu_mips=pe * 500, mem_gb=mem),
        status=status,
    )


def random_tasks(rng, prefix: str, count: int) -> list[DTTask]:
    return [
        task(f"{prefix}-{k}", float(rng.uniform(0.05, 2.5)), float(rng.uniform(0.05, 2.0)))
        for k in range(count)
    ]


def random_knowledge(rng, placed: list[str], incoming: list[str]):
    if not placed:
        return None

    def pair() -> tuple[str, ...]:
        a = placed[int(rng.integers(0, len(placed)))]
        b = incoming[int(rng.integers(0, len(incoming)))]
        return tuple(sorted((a, b)))

    return PatternKnowledge(
        nf=[SequencePattern((pair(),), 2)],
        sf=[SequencePattern((pair(),), 2)],
    )


@pytest.fixture
def two_servers():
    state = PlacementState([s3(1), s3(2)])
    state.deploy_vm(vm_for_tier(VMTier.SMALL).instance("vm1"), "S3-001")
    state.deploy_vm(vm_for_tier(VMTier.SMALL).instance("vm2"), "S3-002")
    return state


class TestFits:
    """Tests for the capacity check."""

    def test_mips_ignored(self):
        assert fits(ResourceVector(1, 9999, 1), ResourceVector(1, 0, 1))

    def test_tolerance(self):
        assert fits(ResourceVector(cpu_pe=1 + 1e-12), ResourceVector(cpu_pe=1))
        assert not fits(ResourceVector(cpu_pe=1.01), ResourceVector(cpu_pe=1))


class TestFFD:
    """Tests for First-Fit Decreasing."""

    def test_descending_demand_onto_ordered_vms(self):
        vms = [vm_for_tier(tier).instance(tier.value) for tier in (VMTier.LARGE, VMTier.MEDIUM, VMTier.SMALL)]
        tasks = [task("t0", 2.0, 1.8), task("t1", 2.0, 0.8), task("t2", 1.0, 0.4)]
        delta = ffd_assign(tasks, vms)
        assert delta.assignments == {"t0": "large", "t1": "medium", "t2": "small"}

        state = PlacementState([s3(1)])
        for vm in vms:
            state.deploy_vm(vm, "S3-001")
        state.apply(delta, {t.id: t.demand for t in tasks})
        state.validate()

    def test_bins_tried_in_given_order(self):
        medium = vm_for_tier(VMTier.MEDIUM).instance("m")
        small = vm_for_tier(VMTier.SMALL).instance("s")
        tasks = [task("t1", 0.5), task("t2", 1.0), task("t3", 0.5)]
        assert ffd_assign(tasks, [medium, small]).assignments == {"t2": "m", "t1": "m", "t3": "m"}
        assert ffd_assign(tasks, [small, medium]).assignments == {"t2": "s", "t1": "m", "t3": "m"}

    def test_empty_task_list(self):
        assert not ffd_assign([], [vm_for_tier(VMTier.SMALL).instance("s")])

    def test_unplaced(self):
        delta = ffd_assign([task("big", 3.0)], [vm_for_tier(VMTier.SMALL).instance("s")])
        assert delta.unplaced == ["big"]

    def test_place_vms_fills_active_first(self):
        servers = [s3(1), s3(2)]
        vms = [vm_for_tier(VMTier.XLARGE).instance(f"x{k}") for k in range(4)]
        mapping = place_vms(vms, servers)
        assert sorted(mapping.values()) == ["S3-001", "S3-001", "S3-001", "S3-002"]

    def test_place_vms_insufficient(self):
        with pytest.raises(InsufficientCapacity):
            place_vms([vm_for_tier(VMTier.XLARGE).instance("x")], [catalog_servers()[0]])


class TestPlacementState:
    """Tests for state mutations and validation."""

    def test_assign_rejects_overflow(self, two_servers):
        two_servers.assign("a", ResourceVector(cpu_pe=0.8, mem_gb=0.1), "vm1")
        with pytest.raises(InvariantViolation):
            two_servers.assign("b", ResourceVector(cpu_pe=0.5, mem_gb=0.1), "vm1")

    def test_double_assign(self, two_servers):
        two_servers.assign("a", ResourceVector(cpu_pe=0.1), "vm1")
        with pytest.raises(InvariantViolation, match="already assigned"):
            two_servers.assign("a", ResourceVector(cpu_pe=0.1), "vm2")

    def test_remove_busy_vm(self, two_servers):
        two_servers.assign("a", ResourceVector(cpu_pe=0.1), "vm1")
        with pytest.raises(InvariantViolation):
            two_servers.remove_vm("vm1")
        assert two_servers.release_empty_vms() == ["vm2"]

    def test_even_replica_group_invalid(self, two_servers):
        two_servers.replica_groups["a"] = ["a", "a@v2"]
        with pytest.raises(InvariantViolation, match="even"):
            two_servers.validate()

    def test_matrices(self, two_servers):
        two_servers.assign("a", ResourceVector(cpu_pe=0.1), "vm2")
        exported = two_servers.to_dict()
        assert exported["upsilon"] == [[0, 1]]
        assert exported["omega"] == [[1, 0], [0, 1]]

    def test_provision_prefers_active_and_min_tier(self, two_servers):
        vm_id = provision_vm(
            two_servers, ResourceVector(cpu_pe=0.5, mem_gb=0.2), catalog_vms(), min_tier=VMTier.LARGE
        )
        assert vm_id == "vm0001-large"
        assert two_servers.vm_to_server[vm_id] == "S3-001"

    def test_provision_avoids_servers(self, two_servers):
        vm_id = provision_vm(
            two_servers, ResourceVector(cpu_pe=0.5), catalog_vms(), avoid_servers={"S3-001"}
        )
        assert two_servers.vm_to_server[vm_id] == "S3-002"

    def test_provision_too_big(self, two_servers):
        assert provision_vm(two_servers, ResourceVector(cpu_pe=5), catalog_vms()) is None

    @pytest.mark.parametrize("seed", range(1000))
    def test_random_scheduler_operations_keep_capacity(self, seed):
        """Random mixes of scheduler operations; capacity holds after every step."""
        rng = np.random.default_rng(seed)
        servers = [s3(1), catalog_servers()[0].instance("S1-001"), catalog_servers()[1].instance("S2-001")]
        state = PlacementState(servers)
        tiers = catalog_vms()
        for step in range(20):
            op = int(rng.integers(0, 6))
            if op == 0:
                picked = [tiers[int(i)] for i in rng.integers(0, len(tiers), size=int(rng.integers(1, 4)))]
                try:
                    place_vms([t.instance(state.next_vm_id(t)) for t in picked], servers, state)
                except InsufficientCapacity:
                    pass
            elif op == 1:
                demand = ResourceVector(cpu_pe=float(rng.uniform(0.1, 4.0)), mem_gb=float(rng.uniform(0.1, 3.0)))
                provision_vm(state, demand, tiers)
            elif op in (2, 3):
                incoming = random_tasks(rng, f"t{step}", int(rng.integers(1, 5)))
                if op == 2:
                    deployed = [state.vms[v] for v in sorted(state.vms)]
                    delta = ffd_assign(incoming, deployed, state.free_capacities())
                else:
                    knowledge = random_knowledge(rng, sorted(state.task_to_vm), [t.id for t in incoming])
                    delta = pattern_guided_place(incoming, state, knowledge)
                state.apply(delta, {t.id: t.demand for t in incoming})
            elif op == 4 and state.task_to_vm:
                placed = sorted(state.task_to_vm)
                state.unassign(placed[int(rng.integers(0, len(placed)))])
            elif op == 5:
                state.release_empty_vms()
            state.validate()


class TestMVP:
    """Tests for MVP failure and replica planning."""

    def test_literal_sum(self):
        result = mvp_failure([0.1, 0.2, 0.3], 3)
        assert result.value == pytest.approx(0.5)
        assert not result.clamped

    def test_literal_clamped(self):
        result = mvp_failure([0.6] * 3, 3)
        assert result.value == 1.0
        assert result.raw == pytest.approx(1.2)
        assert result.clamped

    def test_binomial_majority(self):
        assert mvp_failure([0.1] * 3, 3, "binomial").value == pytest.approx(0.028)

    def test_binomial_heterogeneous(self):
        # P(at least 2 of 3 fail)
        f = [0.1, 0.2, 0.3]
        expected = 0.1 * 0.2 * 0.7 + 0.1 * 0.8 * 0.3 + 0.9 * 0.2 * 0.3 + 0.1 * 0.2 * 0.3
        assert mvp_failure(f, 3, "binomial").value == pytest.approx(expected)

    def test_even_count(self):
        with pytest.raises(EvenVersionCount):
            mvp_failure([0.1, 0.1], 2)

    def test_efficient_task_single_version(self):
        plan = plan_replicas(task("a", 1.0), budget=5, f_estimates=0.3)
        assert plan.num == 1
        assert plan.version_ids() == ["a"]

    def test_fault_prone_meets_target(self):
        plan = plan_replicas(task("a", 1.0, status=FaultStatus.MILD_FAULT_PRONE), 5, 0.01)
        assert plan.num == 3
        assert plan.version_ids() == ["a", "a@v2", "a@v3"]

    def test_budget_exhausted_keeps_best(self):
        plan = plan_replicas(
            task("a", 1.0, status=FaultStatus.HIGHLY_FAULT_PRONE), 5, 0.3, mode="binomial"
        )
        assert plan.num == 5
        assert plan.budget_exhausted

    def test_budget_below_three(self):
        plan = plan_replicas(task("a", 1.0, status=FaultStatus.HIGHLY_FAULT_PRONE), 2, 0.3)
        assert plan.num == 1
        assert plan.budget_exhausted


class TestGuidedPlacement:
    """Tests for pattern-guided placement."""

    def knowledge(self, nf=(), sf=()):
        return PatternKnowledge(
            nf=[SequencePattern((tuple(sorted(p)),), 2) for p in nf],
            sf=[SequencePattern((tuple(sorted(p)),), 2) for p in sf],
        )

    def test_no_knowledge_matches_ffd(self, two_servers):
        two_servers.assign("a", ResourceVector(cpu_pe=0.5), "vm1")
        delta = pattern_guided_place([task("b", 0.3)], two_servers, None)
        assert delta.assignments == {"b": "vm1"}

    def test_non_supportive_pattern_avoided(self, two_servers):
        two_servers.assign("a", ResourceVector(cpu_pe=0.5), "vm1")
        delta = pattern_guided_place([task("b", 0.3)], two_servers, self.knowledge(nf=[("a", "b")]))
        assert delta.assignments == {"b": "vm2"}

    def test_supportive_pattern_preferred(self, two_servers):
        two_servers.assign("a", ResourceVector(cpu_pe=0.5), "vm2")
        delta = pattern_guided_place([task("b", 0.3)], two_servers, self.knowledge(sf=[("a", "b")]))
        assert delta.assignments == {"b": "vm2"}

    def test_avoided_servers_tried_last(self, two_servers):
        two_servers.assign("a", ResourceVector(cpu_pe=0.4), "vm1")
        delta = pattern_guided_place(
            [task("a@v2", 0.4)], two_servers, None, avoid_servers={"a@v2": {"S3-001"}}
        )
        assert delta.assignments == {"a@v2": "vm2"}

    def test_avoided_server_used_when_nothing_else_fits(self, two_servers):
        two_servers.assign("b", ResourceVector(cpu_pe=0.9), "vm2")
        delta = pattern_guided_place(
            [task("a@v2", 0.4)], two_servers, None, avoid_servers={"a@v2": {"S3-001"}}
        )
        assert delta.assignments == {"a@v2": "vm1"}

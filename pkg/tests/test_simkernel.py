"""Unit tests for reliability formulas, the simulation kernel and the experiment grid."""

import numpy as np
import pytest

from src.comparison import compare_modes
from src.domain.catalog import VMTier, catalog_servers, vm_for_tier
from src.domain.resources import ResourceVector
from src.domain.status import DTTask
from src.scheduler.placement import PlacementState
from src.simkernel.experiment import CellError, cell_seed, run_cell, run_experiment
from src.simkernel.kernel import (
    TABLE_COLUMNS,
    FaultCause,
    SimConfig,
    SimKernel,
    server_pool,
)
from src.simkernel.reliability import (
    UndefinedAvailability,
    availability,
    compute_mtbf,
    compute_mttr,
    power,
    resource_utilization,
)
from src.simkernel.workload import Workload, generate_workload

FAST = SimConfig(
    horizons=(25,),
    app_sizes=(4,),
    history_min=80,
    train_window=16,
    window=4,
    retrain_ticks=5,
    initial_rounds=1,
    local_epochs=1,
    hidden_size=2,
)


def nominal_task(task_id: str, client: str, pe: float, mem: float) -> DTTask:
    return DTTask(
        id=task_id,
        app_id="app",
        client_id=client,
        demand=ResourceVector(cpu_pe=pe, cpu_mips=pe * 500, mem_gb=mem),
    )


def one_tick_workload(*tasks: DTTask, util=(1.0, 1.0, 0.1)) -> Workload:
    return Workload(
        tasks=list(tasks),
        usage={t.id: np.array([util]) for t in tasks},
        history_ticks=0,
    )


def small_vm(vm_id: str):
    return vm_for_tier(VMTier.SMALL).instance(vm_id)


class TestReliabilityFormulas:
    """Tests for MTBF, MTTR, availability, RU and power."""

    def test_mtbf(self):
        assert compute_mtbf([300, 200], 2).value == pytest.approx(250)

    def test_mtbf_without_failures(self):
        result = compute_mtbf([300, 200], 0)
        assert result.value == pytest.approx(500)
        assert result.no_failures

    def test_mttr(self):
        assert compute_mttr([0.42], 2).value == pytest.approx(0.21)
        assert compute_mttr([0.42], 0).value == 0.0

    def test_availability(self):
        assert availability(99, 1) == pytest.approx(0.99)
        assert availability(857.34, 0.041) == pytest.approx(0.9999522, rel=1e-6)

    def test_availability_undefined(self):
        with pytest.raises(UndefinedAvailability):
            availability(0, 0)

    def test_power(self):
        s1, _, s3 = catalog_servers()
        assert power([s3], {"S3": 0.0}) == pytest.approx(0.0584)
        assert power([s3], {"S3": 1.0}) == pytest.approx(0.222)
        assert power([s1], {"S1": 0.5}) == pytest.approx(0.11435)
        assert power([s1, s3], {}) == 0.0

    def test_power_rejects_bad_ru(self):
        with pytest.raises(ValueError):
            power(catalog_servers(), {"S1": 1.5})

    def test_resource_utilization(self):
        state = PlacementState(server_pool(2))
        state.deploy_vm(vm_for_tier(VMTier.LARGE).instance("vm1"), "S3-001")
        util = resource_utilization(state)
        assert util.aggregate == pytest.approx((3 / 12 + 2 / 16) / 2)
        assert list(util.per_server) == ["S3-001"]

    def test_utilization_with_no_active_server(self):
        util = resource_utilization(PlacementState(server_pool(1)))
        assert util.undefined
        assert util.aggregate == 0.0


class TestSimConfig:
    """Tests for configuration validation."""

    def test_horizon_must_be_tick_multiple(self):
        with pytest.raises(ValueError, match="multiple"):
            SimConfig(horizons=(52,))

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="mode"):
            SimConfig(modes=("simifed", "magic"))

    def test_history_covers_window(self):
        with pytest.raises(ValueError, match="window"):
            SimConfig(history_min=30, window=12)

    def test_unknown_vm_tier(self):
        with pytest.raises(ValueError):
            SimConfig(default_vm_tier="huge")

    def test_mttr_base_ms(self):
        assert SimConfig().mttr_base_ms == 12600

    def test_server_pool_names(self):
        assert [s.id for s in server_pool(4)] == ["S3-001", "S2-002", "S1-003", "S3-004"]


class TestStep:
    """Hand-built placements run through a single tick."""

    def test_contention_fails_and_migrates(self):
        workload = one_tick_workload(nominal_task("a001", "c001", 2.0, 1.0), util=(1.0, 0.5, 0.1))
        kernel = SimKernel(SimConfig(), workload, mode="none")
        kernel.state.deploy_vm(small_vm("vm-small"), "S3-001")
        kernel.state.assign("a001", ResourceVector(0.9, 450, 0.4), "vm-small")

        events = kernel.step(0)

        assert len(events) == 1
        assert events[0].cause is FaultCause.RESOURCE_CONTENTION
        assert not events[0].masked
        assert events[0].repair_duration_min == pytest.approx(0.21)
        migrations = [e for e in kernel.events if e["type"] == "migration"]
        assert [(m["from_vm"], m["to_vm"]) for m in migrations] == [("vm-small", "vm0001-large")]

        metrics = kernel.metrics()
        assert metrics.num_failures == 1
        assert metrics.downtime_ms == {"c001": 12600}
        assert metrics.mtbf_min == pytest.approx(4.79)
        assert metrics.mttr_min == pytest.approx(0.21)
        assert metrics.fault_pred_accuracy_pct == 0.0
        assert metrics.resource_contention_pct == 100.0
        assert metrics.availability_pct == pytest.approx(100 * 4.79 / 5.0)

    def test_no_contention_no_failure(self):
        workload = one_tick_workload(nominal_task("a001", "c001", 0.5, 0.2))
        kernel = SimKernel(SimConfig(), workload, mode="none")
        kernel.state.deploy_vm(small_vm("vm1"), "S3-001")
        kernel.state.assign("a001", ResourceVector(0.5, 250, 0.2), "vm1")
        assert kernel.step(0) == []
        metrics = kernel.metrics()
        assert metrics.availability_pct == 100.0
        assert metrics.no_failures
        assert metrics.success_pct == 100.0

    def test_one_of_three_versions_down_is_masked(self):
        tasks = [nominal_task("a", "c001", 0.8, 0.2), nominal_task("b", "c002", 0.5, 0.2)]
        kernel = SimKernel(SimConfig(), one_tick_workload(*tasks), mode="none", servers=server_pool(3))
        state = kernel.state
        for k, server in enumerate(["S3-001", "S2-002", "S1-003"], start=1):
            state.deploy_vm(small_vm(f"vm{k}"), server)
        reservation = ResourceVector(0.4, 200, 0.1)
        for version, vm_id in (("a", "vm1"), ("a@v2", "vm2"), ("a@v3", "vm3")):
            state.assign(version, reservation, vm_id)
        state.replica_groups["a"] = ["a", "a@v2", "a@v3"]
        state.assign("b", ResourceVector(0.5, 250, 0.2), "vm1")

        events = {e.task_id: e for e in kernel.step(0)}

        assert set(events) == {"a", "b"}
        assert events["a"].masked
        assert not events["b"].masked
        assert kernel.metrics().num_failures == 1
        assert kernel.downtime_ms["c001"] == 0

    def test_two_of_three_versions_down_is_a_failure(self):
        tasks = [
            nominal_task("a", "c001", 0.8, 0.2),
            nominal_task("b", "c002", 0.5, 0.2),
            nominal_task("c", "c003", 0.5, 0.2),
        ]
        kernel = SimKernel(SimConfig(), one_tick_workload(*tasks), mode="none", servers=server_pool(3))
        state = kernel.state
        for k, server in enumerate(["S3-001", "S2-002", "S1-003"], start=1):
            state.deploy_vm(small_vm(f"vm{k}"), server)
        reservation = ResourceVector(0.4, 200, 0.1)
        for version, vm_id in (("a", "vm1"), ("a@v2", "vm2"), ("a@v3", "vm3")):
            state.assign(version, reservation, vm_id)
        state.replica_groups["a"] = ["a", "a@v2", "a@v3"]
        state.assign("b", ResourceVector(0.5, 250, 0.2), "vm1")
        state.assign("c", ResourceVector(0.5, 250, 0.2), "vm2")

        events = {e.task_id: e for e in kernel.step(0)}

        assert not events["a"].masked
        assert "a@v3" not in events
        assert kernel.metrics().num_failures == 3
        assert kernel.downtime_ms["c001"] > 0
        kernel.state.validate()

    def test_random_faults_are_migrated(self):
        config = SimConfig(random_fault_rate=100.0)
        workload = one_tick_workload(nominal_task("a001", "c001", 0.5, 0.2))
        kernel = SimKernel(config, workload, mode="none")
        kernel.state.deploy_vm(small_vm("vm1"), "S3-001")
        kernel.state.assign("a001", ResourceVector(0.5, 250, 0.2), "vm1")
        (event,) = kernel.step(0)
        assert event.cause is FaultCause.INJECTED_RANDOM
        assert kernel.state.task_to_vm["a001"] != "vm1"
        assert kernel.metrics().overload_pct == 0.0

    def test_fault_injection_off(self):
        config = SimConfig(fault_injection=False)
        workload = one_tick_workload(nominal_task("a001", "c001", 2.0, 1.0))
        kernel = SimKernel(config, workload, mode="none")
        kernel.state.deploy_vm(small_vm("vm1"), "S3-001")
        kernel.state.assign("a001", ResourceVector(0.9, 450, 0.4), "vm1")
        assert kernel.step(0) == []

    def test_unplaced_task_books_full_tick_once(self):
        tasks = [nominal_task("a001", "c001", 0.5, 0.2), nominal_task("b001", "c002", 0.5, 0.2)]
        workload = Workload(
            tasks=tasks,
            usage={t.id: np.array([(1.0, 1.0, 0.1)] * 2) for t in tasks},
            history_ticks=0,
        )
        kernel = SimKernel(SimConfig(), workload, mode="none")
        kernel.state.deploy_vm(small_vm("vm1"), "S3-001")
        kernel.state.assign("a001", ResourceVector(0.5, 250, 0.2), "vm1")

        assert kernel.step(0) == []
        assert kernel.step(1) == []

        metrics = kernel.metrics()
        assert metrics.num_failures == 1
        assert kernel.downtime_ms == {"c001": 0, "c002": 600000}
        assert metrics.mtbf_min == pytest.approx(10.0)
        assert metrics.mttr_min == pytest.approx(10.0)
        assert metrics.availability_pct == pytest.approx(50.0)

    def test_resumed_then_suspended_again_counts_twice(self):
        tasks = [nominal_task("a001", "c001", 0.5, 0.2), nominal_task("b001", "c002", 0.5, 0.2)]
        workload = Workload(
            tasks=tasks,
            usage={t.id: np.array([(1.0, 1.0, 0.1)] * 3) for t in tasks},
            history_ticks=0,
        )
        kernel = SimKernel(SimConfig(), workload, mode="none")
        kernel.state.deploy_vm(small_vm("vm1"), "S3-001")
        kernel.state.deploy_vm(small_vm("vm2"), "S3-001")
        kernel.state.assign("a001", ResourceVector(0.5, 250, 0.2), "vm1")

        kernel.step(0)
        kernel.state.assign("b001", ResourceVector(0.5, 250, 0.2), "vm2")
        kernel.step(1)
        kernel.state.unassign("b001")
        kernel.step(2)

        assert kernel.num_failures == 2
        assert kernel.downtime_ms["c002"] == 600000

    def test_failed_migration_is_logged(self, caplog):
        config = SimConfig(random_fault_rate=100.0)
        tasks = [nominal_task("a001", "c001", 0.6, 0.2), nominal_task("b001", "c002", 0.6, 0.2)]
        servers = [catalog_servers()[0].instance("S1-001")]
        kernel = SimKernel(config, one_tick_workload(*tasks), mode="none", servers=servers)
        kernel.state.deploy_vm(small_vm("vm1"), "S1-001")
        kernel.state.deploy_vm(small_vm("vm2"), "S1-001")
        kernel.state.assign("a001", ResourceVector(0.6, 300, 0.2), "vm1")
        kernel.state.assign("b001", ResourceVector(0.6, 300, 0.2), "vm2")

        with caplog.at_level("WARNING"):
            kernel.step(0)

        assert "MIGRATION_FAILED: a001" in caplog.text
        assert kernel.state.task_to_vm["a001"] == "vm1"
        assert kernel.migrations == 0


class TestRun:
    """Short end-to-end cells."""

    @pytest.fixture(scope="class")
    def cell(self):
        return run_cell(FAST, "simifed", 4, 25)

    def test_ledger_conservation(self, cell):
        metrics = cell.metrics
        for client, uptime in metrics.uptime_ms.items():
            assert uptime + metrics.downtime_ms[client] == 25 * 60_000

    def test_complementary_percentages(self, cell):
        metrics = cell.metrics
        assert metrics.success_pct + metrics.overload_pct == pytest.approx(100.0)
        assert metrics.fault_pred_accuracy_pct + metrics.resource_contention_pct == pytest.approx(100.0)
        assert 0.0 <= metrics.availability_pct <= 100.0

    def test_records_every_instance(self, cell):
        assert len(cell.tdtdb) >= 4 * 5
        assert cell.rounds and cell.losses
        assert set(cell.metrics.to_row()) == {"mode", *TABLE_COLUMNS, "Num_F"}

    def test_deterministic(self, cell):
        again = run_cell(FAST, "simifed", 4, 25)
        assert again.metrics.to_row() == cell.metrics.to_row()
        assert again.events == cell.events

    def test_none_mode_trains_nothing(self):
        cell = run_cell(FAST, "none", 4, 25)
        assert cell.rounds == []
        assert cell.metrics.mode == "none"

    def test_horizon_longer_than_workload(self):
        workload = generate_workload(2, 25, 80, seed=0)
        with pytest.raises(ValueError, match="covers"):
            SimKernel(FAST, workload).run(50)

    def test_cell_seed_shared_across_modes(self):
        assert cell_seed(0, 10, 50) == cell_seed(0, 10, 50)
        assert cell_seed(0, 10, 50) != cell_seed(1, 10, 50)

    def test_experiment_grid(self):
        config = SimConfig(**{**FAST.__dict__, "modes": ("fed", "none")})
        result = run_experiment(config)
        assert [(m.mode, m.app_size, m.horizon_min) for m in result.metrics] == [
            ("fed", 4, 25),
            ("none", 4, 25),
        ]
        assert all({"mode", "app_size", "horizon_min"} <= set(e) for e in result.events)
        assert len(result.comparison_rows()) == 2

    def test_cell_error_carries_coordinates(self):
        config = SimConfig(**{**FAST.__dict__, "modes": ("simifed",), "app_sizes": (1,)})
        with pytest.raises(CellError) as exc:
            run_experiment(config)
        assert exc.value.app_size == 1


@pytest.mark.slow
class TestAvailabilityTargets:
    """Desk-scale availability runs."""

    def test_sfdtm_availability_above_99(self):
        cell = run_cell(SimConfig(), "simifed", 10, 400)
        assert cell.metrics.availability_pct >= 99.0

    def test_sfdtm_improves_on_none(self):
        config = SimConfig(horizons=(400,), app_sizes=(10,))
        comparison = compare_modes(config, range(10), 10, 400, "simifed", "none")
        assert comparison.median_difference > 0.0

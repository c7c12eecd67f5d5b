"""Discrete-time fault-tolerant execution loop."""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from ..domain.catalog import ServerSpec, VMSpec, VMTier, catalog_servers, catalog_vms
from ..domain.resources import ResourceVector
from ..domain.status import FaultStatus, DTTask, classify_status, default_threshold
from ..forecast.federation import FederationConfig, GlobalModel, forecast_recursive, run_federation
from ..forecast.training import TrainingConfig
from ..patterns.knowledge import PatternKnowledge, mine_knowledge
from ..patterns.tdtdb import Outcome, TDTdb, TransactionRecord, build_tdtdb
from ..scheduler.guided import pattern_guided_place
from ..scheduler.placement import PlacementState, bin_order, fits, provision_vm, task_order
from ..scheduler.replication import MVP_MODES, plan_replicas
from ..trace.windowing import window_array
from .reliability import (
    availability,
    compute_mtbf,
    compute_mttr,
    power,
    resource_utilization,
)
from .workload import CPU, MEM, Workload

logger = logging.getLogger(__name__)

FORECAST_MODES = ("simifed", "fed", "none")
EVENT_SCHEMA_VERSION = 1
MS_PER_MIN = 60_000


class FaultCause(Enum):
    RESOURCE_CONTENTION = "ResourceContention"
    INJECTED_RANDOM = "InjectedRandom"


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings; defaults follow the desk-scale experiment grid."""

    tick_min: int = 5
    horizons: tuple[int, ...] = (50, 100, 200, 400)
    app_sizes: tuple[int, ...] = (10, 20, 40, 60, 80, 100)
    modes: tuple[str, ...] = ("simifed", "fed", "none")
    seed: int = 0
    mttr_base_min: float = 0.21

    # forecasting
    tau: float = 0.9
    history_min: int = 240
    train_window: int = 48
    window: int = 12
    retrain_ticks: int = 10
    initial_rounds: int = 3
    local_epochs: int = 5
    hidden_size: int = 8
    lr: float = 0.01
    headroom: float = 0.1

    # classification and replication
    threshold_fraction: float = 0.9
    replication: bool = True
    target_failure: float = 0.05
    mvp_mode: str = "literal"
    max_versions: int = 5
    replica_budget_factor: int = 2
    prior_failure: float = 0.05

    # pattern guidance
    pattern_guidance: bool = True
    min_sup: float = 0.1
    min_sup_sweep: tuple[float, ...] = (0.009, 0.040, 0.065, 0.100, 0.250)
    pattern_window_ticks: int = 40
    max_pattern_itemsets: int = 1
    max_itemset_size: int = 2

    # placement and faults
    default_vm_tier: str = "large"
    autoscale: bool = True
    autoscale_epochs: int = 2
    fault_injection: bool = True
    random_fault_rate: float = 0.0
    correlation: float = 0.8
    outlier_fraction: float = 0.2
    mips_per_pe: float = 500.0

    def __post_init__(self):
        if self.tick_min < 1:
            raise ValueError(f"tick_min must be >= 1, got {self.tick_min}")
        for horizon in self.horizons:
            if horizon <= 0 or horizon % self.tick_min != 0:
                raise ValueError(f"Horizon {horizon} is not a positive multiple of tick {self.tick_min}")
        if self.history_min % self.tick_min != 0:
            raise ValueError("history_min must be a multiple of tick_min")
        for mode in self.modes:
            if mode not in FORECAST_MODES:
                raise ValueError(f"Unknown forecaster mode: {mode}. Use one of {FORECAST_MODES}.")
        if self.mvp_mode not in MVP_MODES:
            raise ValueError(f"Unknown MVP mode: {self.mvp_mode}. Use one of {MVP_MODES}.")
        if self.retrain_ticks < 1 or self.window < 1:
            raise ValueError("retrain_ticks and window must be >= 1")
        if self.history_min // self.tick_min < self.window + 2:
            raise ValueError("history_min must cover at least window + 2 ticks")
        VMTier(self.default_vm_tier)

    @property
    def tick_ms(self) -> int:
        return self.tick_min * MS_PER_MIN

    @property
    def mttr_base_ms(self) -> int:
        return int(round(self.mttr_base_min * MS_PER_MIN))


@dataclass(frozen=True)
class FaultEvent:
    """One failed task instance at one tick."""

    timestamp: int
    task_id: str
    vm_id: str
    server_id: str
    cause: FaultCause
    predicted: bool
    repair_duration_min: float
    masked: bool

    def to_dict(self) -> dict:
        return {
            "schema_version": EVENT_SCHEMA_VERSION,
            "type": "fault",
            "timestamp": self.timestamp,
            "task_id": self.task_id,
            "vm_id": self.vm_id,
            "server_id": self.server_id,
            "cause": self.cause.value,
            "predicted": self.predicted,
            "repair_duration_min": self.repair_duration_min,
            "masked": self.masked,
        }


@dataclass(frozen=True)
class MigrationEvent:
    """A task instance moved between VMs."""

    timestamp: int
    task_id: str
    from_vm: str
    to_vm: Optional[str]
    reason: str

    def to_dict(self) -> dict:
        return {
            "schema_version": EVENT_SCHEMA_VERSION,
            "type": "migration",
            "timestamp": self.timestamp,
            "task_id": self.task_id,
            "from_vm": self.from_vm,
            "to_vm": self.to_vm,
            "reason": self.reason,
        }


TABLE_COLUMNS = (
    "Size(A)", "T", "MTBF", "MTTR", "AV%", "F^Pred%", "RC%",
    "MIG#", "PW kW", "RU%", "OV%", "SUC%",
)


@dataclass
class SimMetrics:
    """Metric row of one simulated cell."""

    app_size: int
    horizon_min: int
    mode: str
    mtbf_min: float
    mttr_min: float
    availability_pct: float
    fault_pred_accuracy_pct: float
    resource_contention_pct: float
    migrations: int
    power_kw: float
    resource_util_pct: float
    overload_pct: float
    success_pct: float
    num_failures: int = 0
    fault_events: int = 0
    no_failures: bool = False
    uptime_ms: dict[str, int] = field(default_factory=dict)
    downtime_ms: dict[str, int] = field(default_factory=dict)

    def to_row(self) -> dict:
        values = (
            self.app_size, self.horizon_min, self.mtbf_min, self.mttr_min,
            self.availability_pct, self.fault_pred_accuracy_pct, self.resource_contention_pct,
            self.migrations, self.power_kw, self.resource_util_pct,
            self.overload_pct, self.success_pct,
        )
        row = {"mode": self.mode}
        row.update(dict(zip(TABLE_COLUMNS, values)))
        row["Num_F"] = self.num_failures
        return row


@dataclass
class CellResult:
    """Everything one kernel run produced."""

    metrics: SimMetrics
    events: list[dict]
    rounds: list[dict]
    losses: list[dict]
    tdtdb: TDTdb


def server_pool(count: int, catalog: Optional[list[ServerSpec]] = None) -> list[ServerSpec]:
    """count server instances cycling through the catalog, largest first."""
    specs = sorted(catalog or catalog_servers(), key=lambda s: -s.capacity.cpu_pe)
    return [
        specs[k % len(specs)].instance(f"{specs[k % len(specs)].id}-{k + 1:03d}")
        for k in range(count)
    ]


def base_task(instance_id: str) -> str:
    return instance_id.split("@", 1)[0]


def _max_vector(a: ResourceVector, b: ResourceVector) -> ResourceVector:
    return ResourceVector(
        cpu_pe=max(a.cpu_pe, b.cpu_pe),
        cpu_mips=max(a.cpu_mips, b.cpu_mips),
        mem_gb=max(a.mem_gb, b.mem_gb),
    )


class SimKernel:
    """
    Runs one (workload, mode) cell tick by tick.

    Every retraining period the kernel refreshes forecasts, reservations,
    fault statuses, pattern knowledge and replica groups; every tick it
    realizes usage, detects contention, masks failures by majority vote,
    migrates failed instances and books downtime.
    """

    def __init__(
        self,
        config: SimConfig,
        workload: Workload,
        mode: str = "simifed",
        seed: int = 0,
        servers: Optional[list[ServerSpec]] = None,
        vm_catalog: Optional[list[VMSpec]] = None,
    ):
        if mode not in FORECAST_MODES:
            raise ValueError(f"Unknown forecaster mode: {mode}. Use one of {FORECAST_MODES}.")
        self.config = config
        self.workload = workload
        self.mode = mode
        self.seed = seed
        self.vm_catalog = vm_catalog or catalog_vms()
        self.default_tier = VMTier(config.default_vm_tier)
        self.state = PlacementState(servers or server_pool(len(workload.tasks)))
        self.tdtdb = TDTdb()
        self.knowledge: Optional[PatternKnowledge] = None
        self.model: Optional[GlobalModel] = None
        self.status: dict[str, FaultStatus] = {
            t.id: FaultStatus.LEAST_FAULT_PRONE for t in workload.tasks
        }
        self.predicted: dict[str, ResourceVector] = {}
        self.over_tier: dict[str, int] = {}
        self.rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))

        self.clients = sorted({t.client_id for t in workload.tasks})
        self.downtime_ms: dict[str, int] = {c: 0 for c in self.clients}
        self.events: list[dict] = []
        self.rounds: list[dict] = []
        self.losses: list[dict] = []
        self.num_failures = 0
        self._outage: set[str] = set()
        self.fault_events = 0
        self.predicted_faults = 0
        self.attempts = 0
        self.overloaded = 0
        self.migrations = 0
        self.power_sum = 0.0
        self.ru_sum = 0.0
        self.ticks_run = 0

    # -- epoch work ------------------------------------------------------

    def _versions(self, task_id: str) -> list[str]:
        return self.state.replica_groups.get(task_id, [task_id])

    def _guidance(self) -> Optional[PatternKnowledge]:
        return self.knowledge if self.config.pattern_guidance else None

    def _train(self, tick: int) -> None:
        cfg = self.config
        rounds = cfg.initial_rounds if self.model is None else 1
        datasets = {}
        for task in self.workload.tasks:
            history = self.workload.observed(task.id, tick)[-cfg.train_window:]
            datasets[task.id] = window_array(history, w=cfg.window, h=1, client_id=task.id)
        fed_config = FederationConfig(
            training=TrainingConfig(lr=cfg.lr, epochs=cfg.local_epochs),
            hidden_size=cfg.hidden_size,
            seed=int(np.random.SeedSequence([self.seed, tick, 2]).generate_state(1)[0]),
        )
        tau = cfg.tau if self.mode == "simifed" else -1.0
        result = run_federation(datasets, rounds, tau, fed_config, initial=self.model)
        self.model = result.model

        for record in result.rounds:
            self.rounds.append({"tick": tick, **record.to_row()})
        for r in range(rounds):
            curves = [result.curves[c][r] for c in sorted(result.curves)]
            for epoch in range(cfg.local_epochs):
                self.losses.append({
                    "tick": tick,
                    "round": self.model.round - rounds + r + 1,
                    "epoch": epoch,
                    "loss": float(np.mean([c.losses[epoch] for c in curves])),
                })

    def _forecast(self, tick: int) -> dict[str, ResourceVector]:
        """Peak predicted demand over the coming retraining period."""
        cfg = self.config
        ids = self.workload.task_ids
        windows = np.stack([self.workload.observed(t, tick)[-cfg.window:] for t in ids])
        future = forecast_recursive(self.model.theta, windows, cfg.retrain_ticks)
        predicted = {}
        for k, task_id in enumerate(ids):
            last = windows[k, -1]
            cpu = float(np.clip(max(future[k, :, CPU].max(), last[CPU]), 0.0, 1.0))
            mem = float(np.clip(max(future[k, :, MEM].max(), last[MEM]), 0.0, 1.0))
            predicted[task_id] = self.workload.to_demand(task_id, cpu, mem)
        return predicted

    def _historical_mean(self, tick: int) -> dict[str, ResourceVector]:
        predicted = {}
        for task_id in self.workload.task_ids:
            mean = self.workload.observed(task_id, tick).mean(axis=0)
            predicted[task_id] = self.workload.to_demand(task_id, mean[CPU], mean[MEM])
        return predicted

    def _place_instance(
        self,
        instance_id: str,
        demand: ResourceVector,
        exclude_vm: Optional[str] = None,
        min_tier: Optional[VMTier] = None,
    ) -> Optional[str]:
        """Place one instance on a deployed VM, else on a newly provisioned one."""
        base = base_task(instance_id)
        task = self.workload.task(base)
        avoid = {
            self.state.server_of_task(v) for v in self._versions(base) if v != instance_id
        } - {None}
        vm_id = None
        if min_tier is None:
            candidate = DTTask(id=instance_id, app_id=task.app_id, client_id=task.client_id, demand=demand)
            candidates = sorted(
                (v for v in self.state.vms if v != exclude_vm),
                key=lambda v: bin_order(self.state.vms[v]),
            )
            delta = pattern_guided_place(
                [candidate], self.state, self._guidance(), vm_ids=candidates,
                avoid_servers={instance_id: avoid},
            )
            vm_id = delta.assignments.get(instance_id)
        if vm_id is None or self.state.vm_to_server[vm_id] in avoid:
            fresh = provision_vm(
                self.state, demand, self.vm_catalog, avoid_servers=avoid,
                min_tier=min_tier or self.default_tier,
            )
            if fresh is not None and (vm_id is None or self.state.vm_to_server[fresh] not in avoid):
                vm_id = fresh
        if vm_id is None:
            logger.warning(f"UNPLACED_TASK: {instance_id} fits no VM or server")
            return None
        self.state.assign(instance_id, demand, vm_id)
        return vm_id

    def _migrate(self, instance_id: str, demand: ResourceVector, tick: int, reason: str,
                 min_tier: Optional[VMTier] = None) -> bool:
        """Move an instance off its VM; an instance that fits nowhere is dropped."""
        source = self.state.task_to_vm[instance_id]
        old_demand = self.state.task_demand[instance_id]
        self.state.unassign(instance_id)
        target = self._place_instance(instance_id, demand, exclude_vm=source, min_tier=min_tier)
        if target is None:
            if fits(old_demand, self.state.vm_free(source)):
                self.state.assign(instance_id, old_demand, source)
            else:
                self._drop_version(instance_id)
            return False
        self.migrations += 1
        self.events.append(
            MigrationEvent(tick * self.config.tick_min, instance_id, source, target, reason).to_dict()
        )
        return True

    def _initial_placement(self, reservations: dict[str, ResourceVector]) -> None:
        tasks = [
            DTTask(id=t.id, app_id=t.app_id, client_id=t.client_id, demand=reservations[t.id])
            for t in self.workload.tasks
        ]
        for task in sorted(tasks, key=task_order):
            self._place_instance(task.id, task.demand)

    def _running(self, task_id: str) -> list[str]:
        return [v for v in self._versions(task_id) if v in self.state.task_to_vm]

    def _rebalance(self, tick: int, reservations: dict[str, ResourceVector]) -> None:
        """Apply new reservations and move instances off VMs they overfill."""
        for task_id in self.workload.task_ids:
            if not self._running(task_id):
                self._set_versions(task_id, [])
                self._place_instance(task_id, reservations[task_id])
            for version in self._running(task_id):
                self.state.set_demand(version, reservations[task_id])
        for vm_id in sorted(self.state.vms):
            capacity = self.state.vms[vm_id].capacity
            while not fits(self.state.vm_used(vm_id), capacity):
                members = self.state.tasks_on_vm(vm_id)
                victim = min(
                    members,
                    key=lambda m: (-self.state.task_demand[m].cpu_pe, -self.state.task_demand[m].mem_gb, m),
                )
                self._migrate(victim, self.state.task_demand[victim], tick, "rebalance")

    def _drop_version(self, instance_id: str) -> None:
        """Forget an unassigned instance and keep the group's version count odd."""
        base = base_task(instance_id)
        versions = [v for v in self._running(base) if v != instance_id]
        if not versions:
            logger.warning(f"UNPLACED_TASK: {base} has no capacity left and is suspended")
            self._set_versions(base, [])
            return
        if len(versions) % 2 == 0:
            self.state.unassign(versions.pop())
        self._set_versions(base, versions)

    def _set_versions(self, task_id: str, versions: list[str]) -> None:
        if len(versions) > 1 or (versions and versions[0] != task_id):
            self.state.replica_groups[task_id] = versions
        else:
            self.state.replica_groups.pop(task_id, None)

    def _autoscale(self, tick: int) -> None:
        cfg = self.config
        for task_id in self.workload.task_ids:
            vm_id = self.state.task_to_vm.get(task_id)
            if vm_id is None:
                continue
            vm = self.state.vms[vm_id]
            limit = vm.capacity.scale(cfg.threshold_fraction)
            if fits(self.predicted[task_id], limit):
                self.over_tier[task_id] = 0
                continue
            self.over_tier[task_id] = self.over_tier.get(task_id, 0) + 1
            next_tier = vm.tier.next_up()
            if self.over_tier[task_id] >= cfg.autoscale_epochs and next_tier is not None:
                self._migrate(task_id, self.state.task_demand[task_id], tick, "autoscale", min_tier=next_tier)
                self.over_tier[task_id] = 0

    def _classify(self) -> None:
        """Status of each task from the predicted aggregate load of its VM."""
        for vm_id in sorted(self.state.vms):
            members = self.state.tasks_on_vm(vm_id)
            if not members:
                continue
            capacity = self.state.vms[vm_id].capacity
            load = ResourceVector.sum(self.predicted[base_task(m)] for m in members)
            status = classify_status(
                load, default_threshold(capacity, self.config.threshold_fraction), capacity
            )
            for member in members:
                if member == base_task(member):
                    self.status[member] = status

    def _failure_estimate(self, task_id: str) -> float:
        records = self.tdtdb.for_task(task_id)
        failed = sum(1 for r in records if r.outcome is Outcome.FAILED)
        weight = 10.0
        return float(
            np.clip((failed + weight * self.config.prior_failure) / (len(records) + weight), 0.0, 1.0)
        )

    def _replicate(self, tick: int) -> None:
        cfg = self.config
        n = len(self.workload.tasks)
        remaining = (cfg.replica_budget_factor - 1) * n
        short = 0
        order = sorted(
            self.workload.task_ids,
            key=lambda t: (-self.status[t].severity, -self.predicted[t].cpu_pe, t),
        )
        for task_id in order:
            if task_id not in self.state.task_to_vm:
                continue
            task = self.workload.task(task_id)
            planned = DTTask(
                id=task_id, app_id=task.app_id, client_id=task.client_id,
                demand=self.state.task_demand[task_id], status=self.status[task_id],
            )
            budget = min(cfg.max_versions, 1 + remaining)
            if planned.status.is_fault_prone and budget < 3:
                short += 1
            plan = plan_replicas(
                planned, budget, self._failure_estimate(task_id), cfg.target_failure, cfg.mvp_mode
            )
            desired = plan.version_ids()
            current = self._versions(task_id)
            for version in current:
                if version not in desired and version in self.state.task_to_vm:
                    self.state.unassign(version)
            versions = [v for v in current if v in desired and v in self.state.task_to_vm]
            for version in desired:
                if version in versions:
                    continue
                if self._place_instance(version, planned.demand) is not None:
                    versions.append(version)
            if len(versions) % 2 == 0:
                self.state.unassign(versions.pop())
            self._set_versions(task_id, versions)
            remaining -= len(versions) - 1

        if short:
            logger.warning(
                f"BUDGET_EXHAUSTED: {short} fault-prone tasks left without replicas at tick {tick}"
            )

    def _mine(self, tick: int) -> None:
        cfg = self.config
        start = (tick - cfg.pattern_window_ticks) * cfg.tick_min
        recent = build_tdtdb(r for r in self.tdtdb if r.timestamp >= start)
        if len(recent) == 0:
            self.knowledge = None
            return
        self.knowledge = mine_knowledge(
            recent,
            cfg.min_sup,
            max_itemsets=cfg.max_pattern_itemsets,
            max_itemset_size=cfg.max_itemset_size,
        )

    def epoch(self, tick: int) -> None:
        """Refresh forecasts, placement, statuses, patterns and replicas."""
        cfg = self.config
        if self.mode == "none":
            if tick == 0:
                self.predicted = self._historical_mean(tick)
                self._initial_placement(self.predicted)
                self.state.validate()
            return

        self._train(tick)
        self.predicted = self._forecast(tick)
        reservations = {t: p.scale(1 + cfg.headroom) for t, p in self.predicted.items()}
        if cfg.pattern_guidance:
            self._mine(tick)
        if not self.state.task_to_vm:
            self._initial_placement(reservations)
        else:
            self._rebalance(tick, reservations)
            if cfg.autoscale:
                self._autoscale(tick)
        self._classify()
        if cfg.replication:
            self._replicate(tick)
        self.state.release_empty_vms()
        self.state.validate()

    # -- per tick ---------------------------------------------------------

    def step(self, tick: int) -> list[FaultEvent]:
        """
        Execute one tick on the current placement.

        Returns:
            Fault events of this tick
        """
        cfg = self.config
        now = tick * cfg.tick_min
        instances = sorted(self.state.task_to_vm)
        realized = {t: self.workload.realized(t, tick) for t in self.workload.task_ids}
        usage = {i: realized[base_task(i)] for i in instances}

        failed: dict[str, FaultCause] = {}
        contended: list[str] = []
        if cfg.fault_injection:
            for vm_id in sorted(self.state.vms):
                members = self.state.tasks_on_vm(vm_id)
                load = ResourceVector.sum(usage[m] for m in members)
                if members and not fits(load, self.state.vms[vm_id].capacity):
                    contended.append(vm_id)
                    for m in members:
                        failed[m] = FaultCause.RESOURCE_CONTENTION
            for server_id in self.state.active_servers:
                members = self.state.tasks_on_server(server_id)
                load = ResourceVector.sum(usage[m] for m in members)
                if not fits(load, self.state.servers[server_id].capacity):
                    for m in members:
                        failed.setdefault(m, FaultCause.RESOURCE_CONTENTION)
                    for vm_id in self.state.vms_on_server(server_id):
                        if vm_id not in contended:
                            contended.append(vm_id)
            if cfg.random_fault_rate > 0 and instances:
                p = 1.0 - math.exp(-cfg.random_fault_rate * cfg.tick_min)
                draws = self.rng.random(len(instances))
                for instance, draw in zip(instances, draws):
                    if draw < p:
                        failed.setdefault(instance, FaultCause.INJECTED_RANDOM)

        self.attempts += len(instances)
        self.overloaded += sum(1 for c in failed.values() if c is FaultCause.RESOURCE_CONTENTION)

        location = {i: (self.state.task_to_vm[i], self.state.server_of_task(i)) for i in instances}
        for instance in instances:
            vm_id, server_id = location[instance]
            self.tdtdb.add(
                TransactionRecord(
                    timestamp=now,
                    task_id=instance,
                    vm_id=vm_id,
                    server_id=server_id,
                    usage=usage[instance],
                    outcome=Outcome.FAILED if instance in failed else Outcome.SUCCEEDED,
                )
            )

        groups = {t: [v for v in self._versions(t) if v in location] for t in self.workload.task_ids}
        repair_ms = self._heal(tick, failed, contended, usage, location)

        events = []
        unmasked = set()
        for task_id in self.workload.task_ids:
            versions = groups[task_id]
            down = [v for v in versions if v in failed]
            if down and len(down) >= (len(versions) + 1) // 2:
                unmasked.add(task_id)
        for instance in sorted(failed):
            base = base_task(instance)
            vm_id, server_id = location[instance]
            predicted = self.status[base].is_fault_prone
            event = FaultEvent(
                timestamp=now,
                task_id=instance,
                vm_id=vm_id,
                server_id=server_id,
                cause=failed[instance],
                predicted=predicted,
                repair_duration_min=repair_ms.get(instance, 0) / MS_PER_MIN,
                masked=base not in unmasked,
            )
            events.append(event)
            self.events.append(event.to_dict())
            self.fault_events += 1
            self.predicted_faults += int(predicted)

        booked: dict[str, int] = {}
        for task_id in sorted(unmasked):
            client = self.workload.task(task_id).client_id
            down_ms = max(repair_ms.get(v, 0) for v in groups[task_id] if v in failed)
            down_ms = min(down_ms, cfg.tick_ms - booked.get(client, 0))
            booked[client] = booked.get(client, 0) + down_ms
            self.downtime_ms[client] += down_ms
            self.num_failures += 1

        suspended = [t for t in self.workload.task_ids if not groups[t]]
        for task_id in suspended:
            client = self.workload.task(task_id).client_id
            down_ms = cfg.tick_ms - booked.get(client, 0)
            booked[client] = cfg.tick_ms
            self.downtime_ms[client] += down_ms
            if task_id not in self._outage:
                self.num_failures += 1
                logger.info(f"TASK_SUSPENDED: {task_id} has no running version from t={now}")
        self._outage = unmasked | set(suspended)

        util = resource_utilization(self.state)
        self.ru_sum += util.aggregate
        self.power_sum += power(
            self.state.servers, {s: util.server_ru(s) for s in util.per_server}
        )
        self.ticks_run += 1
        self.state.validate()
        return events

    def _heal(
        self,
        tick: int,
        failed: dict[str, FaultCause],
        contended: list[str],
        usage: dict[str, ResourceVector],
        location: dict[str, tuple[str, str]],
    ) -> dict[str, int]:
        """
        Migrate failed instances; returns each failed instance's repair time in ms.

        Migrations leaving one server queue serially, so the k-th costs
        k * mttr_base.
        """
        cfg = self.config
        queue: dict[str, int] = {}
        repair: dict[str, int] = {}

        def next_slot(server_id: str) -> int:
            queue[server_id] = queue.get(server_id, 0) + 1
            return queue[server_id] * cfg.mttr_base_ms

        for vm_id in contended:
            if vm_id not in self.state.vms:
                continue
            members = [m for m in self.state.tasks_on_vm(vm_id) if m in usage]
            server_id = self.state.vm_to_server[vm_id]
            capacity = self.state.vms[vm_id].capacity
            remaining = sorted(members, key=lambda m: (-usage[m].cpu_pe, -usage[m].mem_gb, m))
            finish = 0
            while remaining:
                victim = remaining.pop(0)
                if self.state.task_to_vm.get(victim) == vm_id:
                    demand = _max_vector(self.state.task_demand[victim], usage[victim].scale(1 + cfg.headroom))
                    finish = next_slot(server_id)
                    if not self._migrate(victim, demand, tick, "self_healing"):
                        logger.warning(f"MIGRATION_FAILED: {victim} found no target off {vm_id} at tick {tick}")
                load = ResourceVector.sum(
                    usage[m] for m in remaining if self.state.task_to_vm.get(m) == vm_id
                )
                if fits(load, capacity):
                    break
            for m in members:
                repair[m] = finish

        for instance in sorted(failed):
            if failed[instance] is not FaultCause.INJECTED_RANDOM or instance in repair:
                continue
            if instance not in self.state.task_to_vm:
                continue
            repair[instance] = next_slot(location[instance][1])
            if not self._migrate(instance, self.state.task_demand[instance], tick, "self_healing"):
                logger.warning(f"MIGRATION_FAILED: {instance} found no target at tick {tick}")
        return repair

    # -- results -----------------------------------------------------------

    def metrics(self, app_size: Optional[int] = None, horizon_min: Optional[int] = None) -> SimMetrics:
        cfg = self.config
        horizon_ms = self.ticks_run * cfg.tick_ms
        uptime_ms = {c: horizon_ms - self.downtime_ms[c] for c in self.clients}
        mtbf = compute_mtbf([u / MS_PER_MIN for u in uptime_ms.values()], self.num_failures)
        mttr = compute_mttr([d / MS_PER_MIN for d in self.downtime_ms.values()], self.num_failures)
        av = 1.0 if self.num_failures == 0 else availability(mtbf.value, mttr.value)

        if self.fault_events:
            f_pred = 100.0 * self.predicted_faults / self.fault_events
            rc = 100.0 * (self.fault_events - self.predicted_faults) / self.fault_events
        else:
            f_pred, rc = 100.0, 0.0
        ov = 100.0 * self.overloaded / self.attempts if self.attempts else 0.0
        ticks = max(self.ticks_run, 1)
        return SimMetrics(
            app_size=app_size if app_size is not None else len(self.workload.tasks),
            horizon_min=horizon_min if horizon_min is not None else self.ticks_run * cfg.tick_min,
            mode=self.mode,
            mtbf_min=mtbf.value,
            mttr_min=mttr.value,
            availability_pct=100.0 * av,
            fault_pred_accuracy_pct=f_pred,
            resource_contention_pct=rc,
            migrations=self.migrations,
            power_kw=self.power_sum / ticks,
            resource_util_pct=100.0 * self.ru_sum / ticks,
            overload_pct=ov,
            success_pct=100.0 - ov,
            num_failures=self.num_failures,
            fault_events=self.fault_events,
            no_failures=mtbf.no_failures,
            uptime_ms=uptime_ms,
            downtime_ms=dict(self.downtime_ms),
        )

    def run(self, horizon_min: int) -> CellResult:
        """Run epochs and ticks over the horizon."""
        cfg = self.config
        ticks = horizon_min // cfg.tick_min
        if ticks > self.workload.ticks:
            raise ValueError(f"Workload covers {self.workload.ticks} ticks, horizon needs {ticks}")
        for tick in range(ticks):
            if tick % cfg.retrain_ticks == 0:
                self.epoch(tick)
            self.step(tick)
        logger.info(
            f"Cell n={len(self.workload.tasks)} T={horizon_min} mode={self.mode}: "
            f"{self.num_failures} failures, {self.migrations} migrations"
        )
        return CellResult(
            metrics=self.metrics(horizon_min=horizon_min),
            events=self.events,
            rounds=self.rounds,
            losses=self.losses,
            tdtdb=self.tdtdb,
        )

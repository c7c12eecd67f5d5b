"""Reliability, utilization and power metrics."""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from ..domain.catalog import ServerSpec
from ..scheduler.placement import PlacementState

logger = logging.getLogger(__name__)

UTILIZATION_RESOURCES = ("cpu_pe", "mem_gb")


class UndefinedAvailability(ValueError):
    """Availability is undefined when MTBF and MTTR are both zero."""


@dataclass(frozen=True)
class LedgerRatio:
    """A per-failure ledger ratio; no_failures marks the zero-failure guard."""

    value: float
    no_failures: bool = False


def compute_mtbf(uptimes: Sequence[float], num_failures: int) -> LedgerRatio:
    """
    Total client uptime over the number of failures.

    With no failures the total uptime is returned and flagged.
    """
    if num_failures < 0:
        raise ValueError(f"num_failures must be >= 0, got {num_failures}")
    total = float(sum(uptimes))
    if num_failures == 0:
        return LedgerRatio(total, no_failures=True)
    return LedgerRatio(total / num_failures)


def compute_mttr(downtimes: Sequence[float], num_failures: int) -> LedgerRatio:
    """Total client downtime over the number of failures; 0 (flagged) with none."""
    if num_failures < 0:
        raise ValueError(f"num_failures must be >= 0, got {num_failures}")
    if num_failures == 0:
        return LedgerRatio(0.0, no_failures=True)
    return LedgerRatio(float(sum(downtimes)) / num_failures)


def availability(mtbf: float, mttr: float) -> float:
    """
    MTBF / (MTBF + MTTR) as a fraction.

    Raises:
        UndefinedAvailability: if both are zero
    """
    if mtbf < 0 or mttr < 0:
        raise ValueError(f"MTBF and MTTR must be >= 0, got {mtbf}, {mttr}")
    if mtbf == 0 and mttr == 0:
        raise UndefinedAvailability("Availability is undefined for MTBF = MTTR = 0")
    return mtbf / (mtbf + mttr)


@dataclass
class Utilization:
    """Per-server per-resource ratios and the aggregate over active servers."""

    per_server: dict[str, dict[str, float]] = field(default_factory=dict)
    aggregate: float = 0.0
    undefined: bool = False

    def server_ru(self, server_id: str) -> float:
        """Mean over CPU and memory for one server."""
        ratios = self.per_server[server_id]
        return sum(ratios.values()) / len(ratios)


def resource_utilization(state: PlacementState) -> Utilization:
    """
    RU of every active server from the VM capacities it hosts.

    aggregate = (sum RU_cpu + sum RU_mem) / (2 * active servers); with no
    active server it is reported as 0 and flagged.
    """
    per_server: dict[str, dict[str, float]] = {}
    for server_id in state.active_servers:
        used = state.server_used(server_id)
        cap = state.servers[server_id].capacity
        per_server[server_id] = {
            r: min(getattr(used, r) / getattr(cap, r), 1.0) for r in UTILIZATION_RESOURCES
        }
    if not per_server:
        return Utilization(undefined=True)
    total = sum(sum(ratios.values()) for ratios in per_server.values())
    return Utilization(
        per_server=per_server,
        aggregate=total / (len(UTILIZATION_RESOURCES) * len(per_server)),
    )


def power(
    servers: Union[Mapping[str, ServerSpec], Iterable[ServerSpec]],
    per_server_ru: Mapping[str, float],
) -> float:
    """
    Power draw in kW of the active servers.

    Each active server draws (pw_max - pw_min_idle) * RU + pw_min_idle watts;
    servers absent from per_server_ru are inactive and draw nothing.
    """
    specs = servers if isinstance(servers, Mapping) else {s.id: s for s in servers}
    watts = 0.0
    for server_id, ru in per_server_ru.items():
        if not 0.0 <= ru <= 1.0:
            raise ValueError(f"RU of server {server_id} must be in [0, 1], got {ru}")
        spec = specs[server_id]
        watts += (spec.pw_max - spec.pw_min_idle) * ru + spec.pw_min_idle
    return watts / 1000.0

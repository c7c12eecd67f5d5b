"""Multi-version programming (MVP) replica planning."""

import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.stats import binom

from ..domain.status import DTTask

logger = logging.getLogger(__name__)

MVP_MODES = ("literal", "binomial")
DEFAULT_TARGET_FAILURE = 0.05


class EvenVersionCount(ValueError):
    """MVP needs an odd number of versions."""

    def __init__(self, num: int):
        self.num = num
        super().__init__(f"Version count must be odd and >= 1, got {num}")


@dataclass(frozen=True)
class MVPFailure:
    """F^MVP with the unclamped value and a clamp flag."""

    value: float
    raw: float
    clamped: bool


def _majority(num: int) -> int:
    return (num + 1) // 2


def _poisson_binomial_tail(f: np.ndarray, k: int) -> float:
    """P(at least k of the independent versions fail)."""
    dist = np.zeros(len(f) + 1)
    dist[0] = 1.0
    for p in f:
        dist[1:] = dist[1:] * (1 - p) + dist[:-1] * p
        dist[0] *= 1 - p
    return float(dist[k:].sum())


def mvp_failure(f: Sequence[float], num: int, mode: str = "literal") -> MVPFailure:
    """
    Failure probability of an MVP group of num versions.

    literal: sum of f(i) for i = (num+1)/2 .. num (1-based), clamped to [0, 1]
    binomial: probability that a majority of independent versions fail

    Raises:
        EvenVersionCount: if num is even or < 1
    """
    if num < 1 or num % 2 == 0:
        raise EvenVersionCount(num)
    if len(f) != num:
        raise ValueError(f"Need {num} failure probabilities, got {len(f)}")
    probs = np.asarray(f, dtype=np.float64)
    if np.any(probs < 0) or np.any(probs > 1):
        raise ValueError("Failure probabilities must be in [0, 1]")
    if mode not in MVP_MODES:
        raise ValueError(f"Unknown MVP mode: {mode}. Use one of {MVP_MODES}.")

    k = _majority(num)
    if mode == "literal":
        raw = float(probs[k - 1:].sum())
    elif np.all(probs == probs[0]):
        raw = float(binom.sf(k - 1, num, probs[0]))
    else:
        raw = _poisson_binomial_tail(probs, k)

    value = min(max(raw, 0.0), 1.0)
    clamped = value != raw
    if clamped:
        logger.warning(f"MVP_CLAMPED: literal F^MVP {raw:.4f} for num={num} clamped to {value}")
    return MVPFailure(value=value, raw=raw, clamped=clamped)


@dataclass(frozen=True)
class ReplicaPlan:
    """Version count chosen for a task and its predicted MVP failure."""

    task_id: str
    num: int
    f: tuple[float, ...]
    mvp_failure: float
    clamped: bool = False
    budget_exhausted: bool = False

    def __post_init__(self):
        if self.num < 1 or self.num % 2 == 0:
            raise EvenVersionCount(self.num)

    def version_ids(self) -> list[str]:
        """Primary first, then `<task>@v<k>` replicas."""
        return [self.task_id] + [f"{self.task_id}@v{k}" for k in range(2, self.num + 1)]


def _estimates(f_estimates: Union[float, Sequence[float]], num: int) -> list[float]:
    if isinstance(f_estimates, (int, float)):
        return [float(f_estimates)] * num
    values = [float(x) for x in f_estimates]
    if not values:
        raise ValueError("f_estimates must not be empty")
    return (values + [values[-1]] * num)[:num]


def plan_replicas(
    task: DTTask,
    budget: int,
    f_estimates: Union[float, Sequence[float]],
    target_failure: float = DEFAULT_TARGET_FAILURE,
    mode: str = "literal",
) -> ReplicaPlan:
    """
    Choose the version count for a task.

    Efficient tasks run a single version. Fault-prone tasks take the smallest
    odd num >= 3 within budget whose F^MVP meets target_failure. If none does,
    the odd num with the lowest F^MVP is used (ties to the smaller num) and
    budget_exhausted is set.

    Args:
        task: Task to plan for
        budget: Most versions this task may run
        f_estimates: Per-version failure probabilities (scalar = uniform)
        target_failure: Acceptable F^MVP
        mode: "literal" or "binomial"
    """
    if not task.status.is_fault_prone:
        f = _estimates(f_estimates, 1)
        return ReplicaPlan(task.id, 1, tuple(f), mvp_failure(f, 1, mode).value)

    if budget < 3:
        f = _estimates(f_estimates, 1)
        result = mvp_failure(f, 1, mode)
        logger.info(f"BUDGET_EXHAUSTED: {task.id} is fault-prone but the budget allows {budget} version(s)")
        return ReplicaPlan(task.id, 1, tuple(f), result.value, result.clamped, budget_exhausted=True)

    best = None
    for num in range(3, budget + 1, 2):
        f = _estimates(f_estimates, num)
        result = mvp_failure(f, num, mode)
        if result.value <= target_failure:
            return ReplicaPlan(task.id, num, tuple(f), result.value, result.clamped)
        if best is None or result.value < best[2].value:
            best = (num, f, result)

    num, f, result = best
    logger.info(
        f"BUDGET_EXHAUSTED: {task.id} reaches F^MVP {result.value:.4f} at best "
        f"(target {target_failure}); using num={num}"
    )
    return ReplicaPlan(task.id, num, tuple(f), result.value, result.clamped, budget_exhausted=True)

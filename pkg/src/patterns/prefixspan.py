"""Prefix-projection frequent sequence mining over itemset sequences."""

import logging
import math
import time
import tracemalloc
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .tdtdb import Itemset, ItemsetSequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SequencePattern:
    """Ordered itemsets with their sequence-level support."""

    elements: tuple[Itemset, ...]
    support: int = 0

    def __post_init__(self):
        if not self.elements or any(len(e) == 0 for e in self.elements):
            raise ValueError("A pattern needs at least one non-empty itemset")
        if self.support < 0:
            raise ValueError(f"support must be >= 0, got {self.support}")

    @property
    def items(self) -> frozenset[str]:
        return frozenset(item for element in self.elements for item in element)

    @property
    def length(self) -> int:
        return sum(len(e) for e in self.elements)

    def canonical(self) -> str:
        return "<" + ",".join("{" + ",".join(e) + "}" for e in self.elements) + ">"

    def contained_in(self, sequence: ItemsetSequence) -> bool:
        """Order-preserving subsequence test with itemset containment."""
        pos = 0
        for element in self.elements:
            needed = set(element)
            while pos < len(sequence) and not needed.issubset(sequence[pos]):
                pos += 1
            if pos == len(sequence):
                return False
            pos += 1
        return True

    def sort_key(self) -> tuple:
        return (self.length, len(self.elements), self.elements)


def absolute_min_sup(relative: float, sequence_count: int) -> int:
    """ceil(relative * |seqdb|), at least 1."""
    if not 0 < relative <= 1:
        raise ValueError(f"Relative minSup must be in (0, 1], got {relative}")
    return max(1, math.ceil(relative * sequence_count - 1e-9))


def mine_frequent(
    seqdb: Sequence[ItemsetSequence],
    min_sup: int,
    max_itemsets: Optional[int] = None,
    max_itemset_size: Optional[int] = None,
) -> list[SequencePattern]:
    """
    Mine every pattern contained in at least min_sup sequences.

    Each projection keeps, per sequence, every position at which an
    embedding of the current prefix can end, so itemset extensions and
    sequence extensions are both counted exactly.

    Args:
        seqdb: Sequence database (itemsets as sorted tuples)
        min_sup: Absolute support threshold (>= 1)
        max_itemsets: Cap on the number of itemsets in a pattern
        max_itemset_size: Cap on the items in one itemset

    Returns:
        Patterns in canonical order (size, itemset count, lexicographic)
    """
    if min_sup < 1:
        raise ValueError(f"min_sup must be >= 1, got {min_sup}")
    sets = [tuple(frozenset(itemset) for itemset in seq) for seq in seqdb]
    results: list[SequencePattern] = []

    def s_extensions(projection: dict[int, list[int]]) -> dict[str, dict[int, list[int]]]:
        found: dict[str, dict[int, list[int]]] = {}
        for sid, ends in projection.items():
            seq = sets[sid]
            first = ends[0]
            for j in range(first + 1, len(seq)):
                for item in seq[j]:
                    found.setdefault(item, {}).setdefault(sid, []).append(j)
        return found

    def i_extensions(
        projection: dict[int, list[int]],
        last: Itemset,
    ) -> dict[str, dict[int, list[int]]]:
        found: dict[str, dict[int, list[int]]] = {}
        top = last[-1]
        for sid, ends in projection.items():
            seq = sets[sid]
            for e in ends:
                for item in seq[e]:
                    if item > top:
                        found.setdefault(item, {}).setdefault(sid, []).append(e)
        return found

    def grow(elements: tuple[Itemset, ...], projection: dict[int, list[int]]) -> None:
        results.append(SequencePattern(elements, len(projection)))

        last = elements[-1]
        if max_itemset_size is None or len(last) < max_itemset_size:
            for item, proj in sorted(i_extensions(projection, last).items()):
                if len(proj) >= min_sup:
                    grow(elements[:-1] + (last + (item,),), proj)

        if max_itemsets is None or len(elements) < max_itemsets:
            for item, proj in sorted(s_extensions(projection).items()):
                if len(proj) >= min_sup:
                    grow(elements + ((item,),), proj)

    starts: dict[str, dict[int, list[int]]] = {}
    for sid, seq in enumerate(sets):
        for j, itemset in enumerate(seq):
            for item in itemset:
                starts.setdefault(item, {}).setdefault(sid, []).append(j)
    for item, proj in sorted(starts.items()):
        if len(proj) >= min_sup:
            grow(((item,),), proj)

    results.sort(key=SequencePattern.sort_key)
    return results


@dataclass
class MiningRun:
    """Patterns from one mining call plus its cost."""

    patterns: list[SequencePattern] = field(default_factory=list)
    min_sup: int = 1
    sequence_count: int = 0
    runtime_ms: float = 0.0
    peak_memory_bytes: int = 0


def run_mining(
    seqdb: Sequence[ItemsetSequence],
    min_sup: int,
    max_itemsets: Optional[int] = None,
    max_itemset_size: Optional[int] = None,
) -> MiningRun:
    """mine_frequent instrumented with wall time and peak traced memory."""
    already_tracing = tracemalloc.is_tracing()
    if not already_tracing:
        tracemalloc.start()
    tracemalloc.reset_peak()
    start = time.perf_counter()
    try:
        patterns = mine_frequent(seqdb, min_sup, max_itemsets, max_itemset_size)
    finally:
        runtime_ms = (time.perf_counter() - start) * 1000
        _, peak = tracemalloc.get_traced_memory()
        if not already_tracing:
            tracemalloc.stop()

    logger.debug(f"Mined {len(patterns)} patterns from {len(seqdb)} sequences in {runtime_ms:.1f} ms")
    return MiningRun(
        patterns=patterns,
        min_sup=min_sup,
        sequence_count=len(seqdb),
        runtime_ms=runtime_ms,
        peak_memory_bytes=peak,
    )


def mining_metrics(run: MiningRun) -> dict:
    """Instrumentation snapshot for minSup sweeps."""
    return {
        "pattern_count": len(run.patterns),
        "runtime_ms": run.runtime_ms,
        "peak_memory_bytes": run.peak_memory_bytes,
    }

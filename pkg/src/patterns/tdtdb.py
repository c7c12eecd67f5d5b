"""Temporal task-execution transaction database (TDTdb)."""

import json
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from ..domain.resources import ResourceVector

# An itemset is a sorted tuple of task ids; a sequence is a tuple of itemsets.
Itemset = tuple[str, ...]
ItemsetSequence = tuple[Itemset, ...]


class Outcome(Enum):
    """Execution outcome of a task at one timestamp."""

    FAILED = "failed"
    SUCCEEDED = "succeeded"


class DuplicateEntry(ValueError):
    """A task has two records at the same timestamp."""

    def __init__(self, task_id: str, timestamp: int):
        self.task_id = task_id
        self.timestamp = timestamp
        super().__init__(f"Duplicate record for task {task_id} at timestamp {timestamp}")


class TDTdbFormatError(ValueError):
    """A TDTdb JSON-lines file cannot be parsed."""


@dataclass(frozen=True)
class TransactionRecord:
    """One task's placement, usage and outcome at one timestamp."""

    timestamp: int
    task_id: str
    vm_id: str
    server_id: str
    usage: ResourceVector
    outcome: Outcome

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "task_id": self.task_id,
            "vm_id": self.vm_id,
            "server_id": self.server_id,
            "usage": self.usage.to_dict(),
            "outcome": self.outcome.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TransactionRecord":
        return cls(
            timestamp=int(data["timestamp"]),
            task_id=str(data["task_id"]),
            vm_id=str(data["vm_id"]),
            server_id=str(data["server_id"]),
            usage=ResourceVector(**data["usage"]),
            outcome=Outcome(data["outcome"]),
        )


class TDTdb:
    """
    Validated transaction database.

    Indexed by (server_id, timestamp) and by task_id. Records are immutable
    once added.
    """

    def __init__(self) -> None:
        self._records: list[TransactionRecord] = []
        self._keys: set[tuple[str, int]] = set()
        self._by_server_time: dict[tuple[str, int], list[TransactionRecord]] = defaultdict(list)
        self._by_task: dict[str, list[TransactionRecord]] = defaultdict(list)

    def add(self, record: TransactionRecord) -> None:
        key = (record.task_id, record.timestamp)
        if key in self._keys:
            raise DuplicateEntry(record.task_id, record.timestamp)
        self._keys.add(key)
        self._records.append(record)
        self._by_server_time[(record.server_id, record.timestamp)].append(record)
        self._by_task[record.task_id].append(record)

    def extend(self, records: Iterable[TransactionRecord]) -> None:
        for record in records:
            self.add(record)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    @property
    def servers(self) -> list[str]:
        return sorted({server for server, _ in self._by_server_time})

    @property
    def timestamps(self) -> list[int]:
        return sorted({t for _, t in self._by_server_time})

    def at(self, server_id: str, timestamp: int) -> list[TransactionRecord]:
        return list(self._by_server_time.get((server_id, timestamp), []))

    def for_task(self, task_id: str) -> list[TransactionRecord]:
        return sorted(self._by_task.get(task_id, []), key=lambda r: r.timestamp)

    def by_server(self) -> dict[str, list[TransactionRecord]]:
        """Records grouped per server, time-ordered."""
        groups: dict[str, list[TransactionRecord]] = defaultdict(list)
        for record in self._records:
            groups[record.server_id].append(record)
        return {
            server: sorted(groups[server], key=lambda r: (r.timestamp, r.task_id))
            for server in sorted(groups)
        }

    def failure_count(self) -> int:
        return sum(1 for r in self._records if r.outcome is Outcome.FAILED)


def build_tdtdb(records: Iterable[TransactionRecord]) -> TDTdb:
    """
    Build a validated TDTdb.

    Raises:
        DuplicateEntry: if a (task, timestamp) pair repeats
    """
    db = TDTdb()
    db.extend(records)
    return db


def extract_sequences(
    db: TDTdb,
    outcome: Outcome,
    start: Optional[int] = None,
    end: Optional[int] = None,
) -> list[ItemsetSequence]:
    """
    Per-server time-ordered itemsets of the tasks with the given outcome.

    Args:
        db: Transaction database
        outcome: Keep only records with this outcome
        start: First timestamp included (inclusive)
        end: Last timestamp included (exclusive)

    Returns:
        One sequence per server that has any matching record, ordered by server id
    """
    sequences = []
    for records in db.by_server().values():
        itemsets: dict[int, set[str]] = defaultdict(set)
        for r in records:
            if r.outcome is not outcome:
                continue
            if start is not None and r.timestamp < start:
                continue
            if end is not None and r.timestamp >= end:
                continue
            itemsets[r.timestamp].add(r.task_id)
        sequence = tuple(tuple(sorted(itemsets[t])) for t in sorted(itemsets))
        if sequence:
            sequences.append(sequence)
    return sequences


def tumbling_windows(timestamps: list[int], length: Optional[int]) -> list[tuple[int, int]]:
    """
    Split the timestamp range into consecutive [start, end) windows.

    length counts timestamps; None means one window over everything.
    """
    if not timestamps:
        return []
    ordered = sorted(set(timestamps))
    if length is None or length >= len(ordered):
        return [(ordered[0], ordered[-1] + 1)]
    if length < 1:
        raise ValueError(f"Window length must be >= 1, got {length}")
    windows = []
    for i in range(0, len(ordered), length):
        chunk = ordered[i:i + length]
        end = ordered[i + length] if i + length < len(ordered) else chunk[-1] + 1
        windows.append((chunk[0], end))
    return windows


def export_jsonl(db: TDTdb, path: Path) -> None:
    """Write one TransactionRecord per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for record in db:
            f.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")


def import_jsonl(path: Path) -> TDTdb:
    """
    Read a TDTdb written by export_jsonl.

    Raises:
        TDTdbFormatError: on an unparsable line
        DuplicateEntry: on repeated (task, timestamp) pairs
    """
    db = TDTdb()
    with open(path) as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = TransactionRecord.from_dict(json.loads(line))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise TDTdbFormatError(f"Line {line_no}: {e}") from e
            db.add(record)
    return db

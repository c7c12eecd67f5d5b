"""Parsing of GCW-style task usage traces."""

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

DEFAULT_SAMPLING_INTERVAL_MIN = 5
SERIES_SCHEMA_VERSION = 1


class TraceError(ValueError):
    """Base class for trace input errors."""


class MalformedRow(TraceError):
    """A row failed to parse or is out of range."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"Malformed row at line {line_no}: {reason}")


class MissingColumn(TraceError):
    """The header lacks a column the schema maps."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Missing column: {name}")


class NonMonotoneTimestamps(TraceError):
    """A task has repeated timestamps."""

    def __init__(self, task_id: str):
        self.task_id = task_id
        super().__init__(f"Timestamps are not strictly increasing for task {task_id}")


@dataclass(frozen=True)
class UsageSample:
    """One task usage measurement; utilizations are fractions in [0, 1]."""

    timestamp: int
    task_id: str
    cpu_util: float
    mem_util: float
    disk_io: float


@dataclass(frozen=True)
class TraceSchema:
    """Column mapping from trace header names to sample fields."""

    timestamp: str = "start_time"
    task_id: str = "task_id"
    cpu_util: str = "cpu_rate"
    mem_util: str = "canonical_memory_usage"
    disk_io: str = "disk_io_time"

    def columns(self) -> dict[str, str]:
        return asdict(self)


DEFAULT_SCHEMA = TraceSchema()

_UTIL_FIELDS = ("cpu_util", "mem_util", "disk_io")


def parse_trace(
    path: Path,
    schema: Optional[TraceSchema] = None,
    sampling_interval_min: int = DEFAULT_SAMPLING_INTERVAL_MIN,
) -> list[UsageSample]:
    """
    Parse a usage CSV into samples sorted by (task_id, timestamp).

    Args:
        path: UTF-8 CSV with a header row
        schema: Column mapping (default: GCW task-usage names)
        sampling_interval_min: Timestamps must be multiples of this

    Returns:
        List of UsageSample

    Raises:
        MissingColumn, MalformedRow, NonMonotoneTimestamps
    """
    schema = schema or DEFAULT_SCHEMA
    path = Path(path)
    if not path.exists():
        raise TraceError(f"Trace file not found: {path}")

    df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    mapping = schema.columns()
    for column in mapping.values():
        if column not in df.columns:
            raise MissingColumn(column)

    if df.empty:
        return []

    parsed = pd.DataFrame({"task_id": df[schema.task_id].str.strip()})
    parsed["timestamp"] = pd.to_numeric(df[schema.timestamp], errors="coerce")
    for name in _UTIL_FIELDS:
        parsed[name] = pd.to_numeric(df[getattr(schema, name)], errors="coerce")

    # Header is line 1, first data row is line 2.
    bad_mask = parsed[["timestamp", *_UTIL_FIELDS]].isna().any(axis=1) | (parsed["task_id"] == "")
    utils = parsed[list(_UTIL_FIELDS)]
    out_of_range = ((utils < 0) | (utils > 1)).any(axis=1)
    ts = parsed["timestamp"]
    off_grid = (ts < 0) | (ts % sampling_interval_min != 0)
    invalid = bad_mask | out_of_range | off_grid
    if invalid.any():
        first = int(np.flatnonzero(invalid.to_numpy())[0])
        if bad_mask.iloc[first]:
            reason = "unparseable or empty field"
        elif out_of_range.iloc[first]:
            reason = "utilization outside [0, 1]"
        else:
            reason = f"timestamp not a non-negative multiple of {sampling_interval_min}"
        raise MalformedRow(first + 2, reason)

    parsed["timestamp"] = parsed["timestamp"].astype(np.int64)
    parsed = parsed.sort_values(["task_id", "timestamp"], kind="mergesort")
    duplicated = parsed.duplicated(["task_id", "timestamp"])
    if duplicated.any():
        raise NonMonotoneTimestamps(str(parsed.loc[duplicated, "task_id"].iloc[0]))

    samples = [
        UsageSample(
            timestamp=int(row.timestamp),
            task_id=str(row.task_id),
            cpu_util=float(row.cpu_util),
            mem_util=float(row.mem_util),
            disk_io=float(row.disk_io),
        )
        for row in parsed.itertuples(index=False)
    ]
    logger.info(f"Parsed {len(samples)} samples from {path}")
    return samples


def write_trace(
    samples: list[UsageSample],
    path: Path,
    schema: Optional[TraceSchema] = None,
) -> None:
    """Write samples back to a CSV using the schema's column names."""
    schema = schema or DEFAULT_SCHEMA
    columns = schema.columns()
    df = pd.DataFrame(
        [asdict(s) for s in samples],
        columns=list(columns.keys()),
    ).rename(columns=columns)
    df.to_csv(path, index=False)


def write_samples_jsonl(samples: list[UsageSample], path: Path) -> None:
    """Canonical series file: one sample per line, sorted keys."""
    with open(path, "w", encoding="utf-8") as f:
        for sample in samples:
            f.write(json.dumps(asdict(sample), sort_keys=True) + "\n")


def read_samples_jsonl(path: Path) -> list[UsageSample]:
    """Read a canonical series file written by write_samples_jsonl."""
    samples = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if line.strip():
                samples.append(UsageSample(**json.loads(line)))
    return samples

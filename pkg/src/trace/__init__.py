"""Usage trace ingestion, per-client series, windowing and synthetic traces."""

from .parser import (
    UsageSample,
    TraceSchema,
    DEFAULT_SCHEMA,
    TraceError,
    MalformedRow,
    MissingColumn,
    NonMonotoneTimestamps,
    parse_trace,
    write_trace,
    write_samples_jsonl,
    read_samples_jsonl,
)
from .series import UsageSeries, UnassignedTask, build_series, FEATURES
from .windowing import WindowedDataset, SeriesTooShort, window, window_array, TARGETS
from .synthetic import (
    SyntheticTraceConfig,
    SyntheticTrace,
    generate_trace,
    correlated_pair_scenario,
)

__all__ = [
    "UsageSample",
    "TraceSchema",
    "DEFAULT_SCHEMA",
    "TraceError",
    "MalformedRow",
    "MissingColumn",
    "NonMonotoneTimestamps",
    "parse_trace",
    "write_trace",
    "write_samples_jsonl",
    "read_samples_jsonl",
    "UsageSeries",
    "UnassignedTask",
    "build_series",
    "FEATURES",
    "WindowedDataset",
    "SeriesTooShort",
    "window",
    "window_array",
    "TARGETS",
    "SyntheticTraceConfig",
    "SyntheticTrace",
    "generate_trace",
    "correlated_pair_scenario",
]

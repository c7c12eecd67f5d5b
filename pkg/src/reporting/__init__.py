"""Reporting: metric tables, CSV/JSONL writers and run summaries."""

from .aggregator import (
    COMPARISON_STATS_FILE,
    EVENTS_FILE,
    METRICS_FILE,
    SUMMARY_FILE,
    IncompleteRunDir,
    metrics_frame,
    metrics_table,
    mode_deltas,
    summarize_run,
    write_csv,
    write_jsonl,
    write_metrics,
    write_summary,
)

__all__ = [
    "COMPARISON_STATS_FILE",
    "EVENTS_FILE",
    "METRICS_FILE",
    "SUMMARY_FILE",
    "IncompleteRunDir",
    "metrics_frame",
    "metrics_table",
    "mode_deltas",
    "summarize_run",
    "write_csv",
    "write_jsonl",
    "write_metrics",
    "write_summary",
]

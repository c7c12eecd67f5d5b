"""Result tables, file writers and the markdown run summary."""

import json
import logging
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
import pandas as pd
from rich.table import Table

from ..simkernel.kernel import TABLE_COLUMNS, SimMetrics

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.csv"
EVENTS_FILE = "events.jsonl"
SUMMARY_FILE = "summary.md"
COMPARISON_STATS_FILE = "mode_comparison_stats.csv"
FLOAT_FORMAT = "%.6f"


class IncompleteRunDir(ValueError):
    """Run directory lacks a file the summary needs."""

    def __init__(self, run_dir: Path, missing: str):
        self.run_dir = run_dir
        self.missing = missing
        super().__init__(f"Run directory {run_dir} has no {missing}")


def metrics_frame(metrics: Iterable[SimMetrics]) -> pd.DataFrame:
    """Metric rows with the table column set, mode first."""
    rows = [m.to_row() for m in metrics]
    return pd.DataFrame(rows, columns=["mode", *TABLE_COLUMNS, "Num_F"])


def write_csv(rows: list[dict], path: Path, columns: Optional[list[str]] = None) -> Path:
    """Write rows with a fixed float format so reruns are byte-identical."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(rows, columns=columns)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_metrics(metrics: Iterable[SimMetrics], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    metrics_frame(metrics).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_jsonl(records: Iterable[dict], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True) + "\n")
    return path


def metrics_table(metrics: list[SimMetrics], title: str = "Fault-tolerance metrics") -> Table:
    """Rich table of metric rows."""
    table = Table(title=title)
    table.add_column("mode", style="cyan")
    for column in TABLE_COLUMNS:
        table.add_column(column, justify="right")
    for m in metrics:
        row = m.to_row()
        table.add_row(
            row["mode"],
            *(f"{row[c]:.2f}" if isinstance(row[c], float) else str(row[c]) for c in TABLE_COLUMNS),
        )
    return table


def mode_deltas(frame: pd.DataFrame, baseline: str = "none") -> dict[str, float]:
    """Mean AV% of each mode minus the baseline's, over shared cells."""
    frame = frame.assign(**{"AV%": frame["AV%"].astype(float)})
    if baseline not in set(frame["mode"]):
        return {}
    keys = ["Size(A)", "T"]
    base = frame[frame["mode"] == baseline].set_index(keys)["AV%"]
    deltas = {}
    for mode in sorted(set(frame["mode"]) - {baseline}):
        other = frame[frame["mode"] == mode].set_index(keys)["AV%"]
        shared = other.index.intersection(base.index)
        if len(shared):
            deltas[mode] = float(np.mean(other.loc[shared] - base.loc[shared]))
    return deltas


def comparison_section(stats: pd.DataFrame) -> list[str]:
    """Markdown lines for the paired-seed comparison table."""
    if stats.empty:
        return []
    lines = [f"## Paired comparison over {stats['seed_count'].iloc[0]} seeds", ""]
    lines.append("| Mode | Baseline | Size(A) | T | Mean diff | Median diff | p (t) | p (Wilcoxon) | Significant |")
    lines.append("|---|---|---|---|---|---|---|---|---|")
    for _, row in stats.iterrows():
        lines.append(
            f"| {row['mode_a']} | {row['mode_b']} | {row['app_size']} | {row['horizon_min']} "
            f"| {row['mean_difference']} | {row['median_difference']} | {row['p_value']} "
            f"| {row['wilcoxon_p_value']} | {row['significant']} |"
        )
    lines.append("")
    return lines


def summarize_run(run_dir: Path) -> str:
    """
    Markdown summary of a completed run directory.

    AV, MTBF and MTTR values are copied from metrics.csv as written.

    Raises:
        IncompleteRunDir: if metrics.csv is missing
    """
    run_dir = Path(run_dir)
    path = run_dir / METRICS_FILE
    if not path.exists():
        raise IncompleteRunDir(run_dir, METRICS_FILE)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    if frame.empty:
        raise IncompleteRunDir(run_dir, "metric rows")

    lines = [f"# Run summary: {run_dir.name}", ""]
    for mode, rows in frame.groupby("mode", sort=False):
        lines.append(f"## Mode {mode}")
        lines.append("")
        lines.append("| Size(A) | T | AV% | MTBF | MTTR | MIG# |")
        lines.append("|---|---|---|---|---|---|")
        for _, row in rows.iterrows():
            lines.append(
                f"| {row['Size(A)']} | {row['T']} | {row['AV%']} | {row['MTBF']} | {row['MTTR']} | {row['MIG#']} |"
            )
        lines.append("")
        headline = rows.iloc[-1]
        lines.append(
            f"AV: {headline['AV%']} (MTBF {headline['MTBF']} min, MTTR {headline['MTTR']} min) "
            f"at Size(A)={headline['Size(A)']}, T={headline['T']}"
        )
        lines.append("")

    deltas = mode_deltas(frame)
    if deltas:
        lines.append("## Mode deltas against none")
        lines.append("")
        for mode, delta in deltas.items():
            lines.append(f"- {mode}: {delta:+.4f} AV percentage points")
        lines.append("")

    stats_path = run_dir / COMPARISON_STATS_FILE
    if stats_path.exists():
        lines.extend(comparison_section(pd.read_csv(stats_path, dtype=str, keep_default_na=False)))
    return "\n".join(lines)


def write_summary(run_dir: Path) -> Path:
    run_dir = Path(run_dir)
    path = run_dir / SUMMARY_FILE
    path.write_text(summarize_run(run_dir))
    return path

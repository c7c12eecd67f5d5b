"""Unit tests for reporting module."""

import json

import pytest

from src.comparison import compare_paired
from src.reporting.aggregator import (
    COMPARISON_STATS_FILE,
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
from src.simkernel.kernel import TABLE_COLUMNS, SimMetrics


def metric_row(mode: str, av: float, size: int = 10, horizon: int = 50) -> SimMetrics:
    return SimMetrics(
        app_size=size,
        horizon_min=horizon,
        mode=mode,
        mtbf_min=857.34,
        mttr_min=0.041,
        availability_pct=av,
        fault_pred_accuracy_pct=80.0,
        resource_contention_pct=20.0,
        migrations=3,
        power_kw=0.25,
        resource_util_pct=40.0,
        overload_pct=1.5,
        success_pct=98.5,
        num_failures=2,
    )


class TestWriters:
    """Tests for CSV and JSONL writers."""

    def test_metrics_columns(self, tmp_path):
        path = write_metrics([metric_row("simifed", 99.5)], tmp_path / "metrics.csv")
        header = path.read_text().splitlines()[0].split(",")
        assert header == ["mode", *TABLE_COLUMNS, "Num_F"]

    def test_fixed_float_format(self, tmp_path):
        path = write_csv([{"x": 1 / 3}], tmp_path / "x.csv")
        assert path.read_text().splitlines()[1] == "0.333333"

    def test_empty_rows_keep_header(self, tmp_path):
        path = write_csv([], tmp_path / "empty.csv", ["a", "b"])
        assert path.read_text().strip() == "a,b"

    def test_jsonl_sorted_keys(self, tmp_path):
        path = write_jsonl([{"b": 1, "a": 2}], tmp_path / "events.jsonl")
        line = path.read_text().strip()
        assert line == '{"a": 2, "b": 1}'
        assert json.loads(line) == {"a": 2, "b": 1}

    def test_rich_table(self):
        table = metrics_table([metric_row("fed", 99.0)])
        assert table.row_count == 1
        assert len(table.columns) == len(TABLE_COLUMNS) + 1


class TestModeDeltas:
    """Tests for AV deltas against the baseline."""

    def test_delta(self):
        frame = metrics_frame([metric_row("simifed", 99.5), metric_row("none", 97.0)])
        assert mode_deltas(frame) == {"simifed": pytest.approx(2.5)}

    def test_no_baseline(self):
        frame = metrics_frame([metric_row("simifed", 99.5)])
        assert mode_deltas(frame) == {}


class TestSummary:
    """Tests for the markdown run summary."""

    def test_values_copied_verbatim(self, tmp_path):
        """AV in the summary is the exact string written to metrics.csv."""
        write_metrics([metric_row("simifed", 99.995217), metric_row("none", 98.0)], tmp_path / "metrics.csv")
        summary = summarize_run(tmp_path)
        assert "AV: 99.995217 (MTBF 857.340000 min, MTTR 0.041000 min)" in summary
        assert "## Mode none" in summary
        assert "- simifed: +1.9952 AV percentage points" in summary

    def test_missing_metrics(self, tmp_path):
        with pytest.raises(IncompleteRunDir) as exc:
            summarize_run(tmp_path)
        assert exc.value.missing == "metrics.csv"

    def test_empty_metrics(self, tmp_path):
        write_metrics([], tmp_path / "metrics.csv")
        with pytest.raises(IncompleteRunDir):
            summarize_run(tmp_path)

    def test_write_summary(self, tmp_path):
        write_metrics([metric_row("fed", 99.0)], tmp_path / "metrics.csv")
        path = write_summary(tmp_path)
        assert path.name == "summary.md"
        assert path.read_text().startswith(f"# Run summary: {tmp_path.name}")

    def test_paired_comparison_section(self, tmp_path):
        write_metrics([metric_row("simifed", 99.5), metric_row("none", 98.0)], tmp_path / "metrics.csv")
        row = compare_paired([99.5, 99.0, 99.8], [98.0, 97.5, 98.1], "simifed", "none").to_row(10, 50)
        write_csv([row], tmp_path / COMPARISON_STATS_FILE)
        summary = summarize_run(tmp_path)
        assert "## Paired comparison over 3 seeds" in summary
        assert "| simifed | none | 10 | 50 | 1.566667 |" in summary

    def test_no_comparison_section_without_stats(self, tmp_path):
        write_metrics([metric_row("fed", 99.0)], tmp_path / "metrics.csv")
        assert "Paired comparison" not in summarize_run(tmp_path)

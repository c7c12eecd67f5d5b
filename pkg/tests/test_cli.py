"""Tests for the sfdtm command line."""

import pandas as pd
import pytest

from src.cli import EXIT_CONFIG, EXIT_INPUT, EXIT_INVARIANT, EXIT_OK, create_parser, run
from src.domain.resources import ResourceVector
from src.patterns.tdtdb import Outcome, TransactionRecord, build_tdtdb, export_jsonl

QUICK_SIM = [
    "--modes", "none",
    "--sizes", "3",
    "--horizons", "25",
    "--set", "history_min=80",
]


def simulate(out_dir, seed: int = 0) -> int:
    return run(["-q", "simulate", "--out", str(out_dir), "--seed", str(seed), *QUICK_SIM])


@pytest.fixture
def tdtdb_file(tmp_path):
    usage = ResourceVector(cpu_pe=0.5, cpu_mips=250, mem_gb=0.2)
    records = []
    for ts, server in ((0, "S1"), (5, "S2")):
        for task in ("a", "b"):
            records.append(TransactionRecord(ts, task, f"vm-{server}", server, usage, Outcome.FAILED))
        records.append(TransactionRecord(ts, "c", f"vm-{server}", server, usage, Outcome.SUCCEEDED))
    path = tmp_path / "tdtdb.jsonl"
    export_jsonl(build_tdtdb(records), path)
    return path


class TestParser:
    """Tests for argument parsing."""

    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            create_parser().parse_args([])

    def test_repeatable_set(self):
        args = create_parser().parse_args(["simulate", "--set", "a=1", "--set", "b=2"])
        assert args.overrides == ["a=1", "b=2"]


class TestExitCodes:
    """Tests for error-to-exit-code mapping."""

    def test_unknown_key_is_config_error(self, tmp_path):
        assert run(["-q", "simulate", "--out", str(tmp_path), "--set", "bogus=1"]) == EXIT_CONFIG

    def test_mine_without_tdtdb(self, tmp_path):
        assert run(["-q", "mine", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_mine_missing_file(self, tmp_path):
        assert run(["-q", "mine", "--tdtdb", str(tmp_path / "absent.jsonl")]) == EXIT_INPUT

    def test_report_without_metrics(self, tmp_path):
        assert run(["-q", "report", str(tmp_path)]) == EXIT_INPUT

    def test_malformed_trace(self, tmp_path):
        trace = tmp_path / "trace.csv"
        trace.write_text("start_time,task_id\n0,t1\n")
        assert run(["-q", "forecast", "--out", str(tmp_path), "--trace", str(trace)]) == EXIT_INPUT

    def test_failing_cell_maps_to_invariant_code(self, tmp_path):
        code = run([
            "-q", "simulate", "--out", str(tmp_path), "--modes", "simifed", "--sizes", "1",
            "--horizons", "25", "--set", "history_min=80", "--set", "window=4",
        ])
        assert code == EXIT_INVARIANT


class TestCommands:
    """End-to-end command runs on small inputs."""

    def test_mine_writes_sweep(self, tmp_path, tdtdb_file):
        out = tmp_path / "out"
        code = run([
            "-q", "mine", "--tdtdb", str(tdtdb_file), "--out", str(out), "--minsup-sweep", "0.5,1.0",
        ])
        assert code == EXIT_OK
        metrics = pd.read_csv(out / "mining_metrics.csv")
        assert list(metrics["min_sup"]) == [0.5, 0.5, 1.0, 1.0]
        patterns = pd.read_csv(out / "patterns_minsup_0.5.csv")
        assert "<{a,b}>" in set(patterns["pattern"])
        assert (out / "run_config.env").exists()

    def test_forecast_writes_outputs(self, tmp_path):
        code = run([
            "-q", "forecast", "--out", str(tmp_path), "--rounds", "1",
            "--set", "epochs=1", "--set", "hidden_size=2", "--set", "synthetic_duration_min=120",
        ])
        assert code == EXIT_OK
        rounds = pd.read_csv(tmp_path / "rounds.csv")
        assert list(rounds["round"]) == [1]
        assert (tmp_path / "model.json").exists()
        assert (tmp_path / "loss_vs_epoch.csv").exists()

    def test_simulate_then_report(self, tmp_path):
        assert simulate(tmp_path) == EXIT_OK
        for name in ("metrics.csv", "events.jsonl", "mode_comparison.csv", "tdtdb.jsonl"):
            assert (tmp_path / name).exists()
        assert (tmp_path / "minsup" / "mining_metrics.csv").exists()

        assert run(["-q", "report", str(tmp_path)]) == EXIT_OK
        av = pd.read_csv(tmp_path / "metrics.csv", dtype=str)["AV%"].iloc[0]
        assert f"AV: {av}" in (tmp_path / "summary.md").read_text()

    def test_simulate_is_reproducible(self, tmp_path):
        assert simulate(tmp_path / "one", seed=7) == EXIT_OK
        assert simulate(tmp_path / "two", seed=7) == EXIT_OK
        for name in ("metrics.csv", "events.jsonl"):
            assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()

    def test_seeds_write_paired_comparison(self, tmp_path):
        code = run([
            "-q", "simulate", "--out", str(tmp_path), "--modes", "fed,none", "--sizes", "3",
            "--horizons", "25", "--seeds", "0,1",
            "--set", "history_min=80", "--set", "window=4", "--set", "initial_rounds=1",
            "--set", "local_epochs=1", "--set", "sim_hidden_size=2",
        ])
        assert code == EXIT_OK
        stats = pd.read_csv(tmp_path / "mode_comparison_stats.csv")
        assert len(stats) == 1
        row = stats.iloc[0]
        assert (row["mode_a"], row["mode_b"], row["app_size"], row["horizon_min"]) == ("fed", "none", 3, 25)
        assert row["seed_count"] == 2
        assert 0.0 <= row["p_value"] <= 1.0

        assert run(["-q", "report", str(tmp_path)]) == EXIT_OK
        summary = (tmp_path / "summary.md").read_text()
        assert "## Paired comparison over 2 seeds" in summary
        assert "| fed | none | 3 | 25 |" in summary

    def test_single_seed_skips_comparison(self, tmp_path):
        assert run(["-q", "simulate", "--out", str(tmp_path), "--seeds", "4", *QUICK_SIM]) == EXIT_OK
        assert not (tmp_path / "mode_comparison_stats.csv").exists()

"""Command-line interface for the fault-tolerant DT execution simulator."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

import pandas as pd
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from src.comparison import comparison_rows
from src.config import ConfigError, RunConfig, load_config, parse_overrides
from src.forecast.checkpoint import CheckpointError, save_checkpoint
from src.forecast.federation import FederationResult, run_federation
from src.patterns.knowledge import mine_knowledge, pattern_report
from src.patterns.prefixspan import absolute_min_sup, mining_metrics, run_mining
from src.patterns.tdtdb import (
    DuplicateEntry,
    Outcome,
    TDTdb,
    TDTdbFormatError,
    export_jsonl,
    extract_sequences,
    import_jsonl,
)
from src.reporting.aggregator import (
    COMPARISON_STATS_FILE,
    EVENTS_FILE,
    METRICS_FILE,
    IncompleteRunDir,
    metrics_table,
    write_csv,
    write_jsonl,
    write_metrics,
    write_summary,
)
from src.scheduler.placement import InvariantViolation
from src.simkernel.experiment import CellError, ExperimentResult, run_experiment
from src.trace.parser import TraceError, parse_trace
from src.trace.series import build_series
from src.trace.synthetic import SyntheticTraceConfig, generate_trace
from src.trace.windowing import WindowedDataset, window

logger = logging.getLogger(__name__)
console = Console()

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_INVARIANT = 4

INPUT_ERRORS = (TraceError, TDTdbFormatError, DuplicateEntry, CheckpointError, IncompleteRunDir, FileNotFoundError)


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser."""
    parser = argparse.ArgumentParser(
        prog="sfdtm",
        description="Forecast, mine and simulate fault-tolerant collaborative DT execution.",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Log at INFO level")
    parser.add_argument("--quiet", "-q", action="store_true", help="Minimal output")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=str, help="Flat key=value config file")
        p.add_argument("--seed", type=int, help="Random seed")
        p.add_argument("--out", type=str, help="Output directory")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="Override any config key (repeatable)",
        )

    forecast = sub.add_parser("forecast", help="Train the federated usage forecaster")
    common(forecast)
    forecast.add_argument("--trace", type=str, help="Usage trace CSV")
    forecast.add_argument("--mode", choices=["simifed", "fed"], help="Client selection mode")
    forecast.add_argument("--rounds", type=int, help="Communication rounds")

    mine = sub.add_parser("mine", help="Mine failure/success patterns from a TDTdb")
    common(mine)
    mine.add_argument("--tdtdb", type=str, help="TDTdb JSONL file")
    mine.add_argument("--minsup-sweep", type=str, help="Comma-separated relative minSup values")

    simulate = sub.add_parser("simulate", help="Run the experiment grid")
    common(simulate)
    simulate.add_argument("--modes", type=str, help="Comma-separated modes (simifed,fed,none)")
    simulate.add_argument("--sizes", type=str, help="Comma-separated application sizes")
    simulate.add_argument("--horizons", type=str, help="Comma-separated horizons in minutes")
    simulate.add_argument("--minsup-sweep", type=str, help="Comma-separated relative minSup values")
    simulate.add_argument("--seeds", type=str, help="Comma-separated seeds for the paired mode comparison")

    report = sub.add_parser("report", help="Summarize a completed run directory")
    report.add_argument("run_dir", type=str, help="Directory written by simulate")

    return parser


def setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Config file, then --set overrides, then dedicated flags."""
    overrides = parse_overrides(args.overrides)
    flags = {
        "seed": getattr(args, "seed", None),
        "out": getattr(args, "out", None),
        "trace": getattr(args, "trace", None),
        "mode": getattr(args, "mode", None),
        "rounds": getattr(args, "rounds", None),
        "tdtdb": getattr(args, "tdtdb", None),
        "minsup_sweep": getattr(args, "minsup_sweep", None),
        "modes": getattr(args, "modes", None),
        "sizes": getattr(args, "sizes", None),
        "horizons": getattr(args, "horizons", None),
        "seeds": getattr(args, "seeds", None),
    }
    overrides.update({k: str(v) for k, v in flags.items() if v is not None})
    return load_config(Path(args.config) if args.config else None, overrides)


def _limit(value: int) -> Optional[int]:
    return value if value > 0 else None


# -- forecast ----------------------------------------------------------------


def load_datasets(config: RunConfig) -> dict[str, WindowedDataset]:
    """Windowed client datasets from the trace, or from the synthetic generator."""
    if config.trace:
        samples = parse_trace(Path(config.trace))
        if config.assignment:
            frame = pd.read_csv(config.assignment, dtype=str)
            assignment = dict(zip(frame["task_id"], frame["client_id"]))
        else:
            assignment = {s.task_id: s.task_id for s in samples}
    elif config.synthetic:
        trace = generate_trace(
            SyntheticTraceConfig(
                clients=config.synthetic_clients,
                duration_min=config.synthetic_duration_min,
                correlation=config.synthetic_correlation,
                outlier_clients=config.synthetic_outliers,
                seed=config.seed,
            )
        )
        samples = trace.samples()
        assignment = trace.client_assignment
    else:
        raise ConfigError("forecast needs a trace (--trace) or synthetic=true", "trace")

    datasets = {}
    for series in build_series(samples, assignment):
        key = series.client_id if series.segment == 0 else f"{series.client_id}#{series.segment}"
        datasets[key] = window(series, w=config.window, h=config.horizon, normalize=config.normalize)
    if len(datasets) < 2:
        raise TraceError(f"Federation needs at least 2 client series, found {len(datasets)}")
    return datasets


def forecast_outputs(result: FederationResult, out_dir: Path) -> None:
    write_csv(
        [r.to_row() for r in result.rounds],
        out_dir / "rounds.csv",
        ["round", "client_count", "selected_count", "mae", "mse", "accuracy_pct", "calibration"],
    )
    loss_rows = []
    for client_id, curves in sorted(result.curves.items()):
        for r, curve in enumerate(curves, start=1):
            for epoch, loss in enumerate(curve.losses):
                loss_rows.append({"client_id": client_id, "round": r, "epoch": epoch, "loss": loss})
    write_csv(loss_rows, out_dir / "loss_vs_epoch.csv", ["client_id", "round", "epoch", "loss"])
    save_checkpoint(result.model, out_dir / "model.json")


def cmd_forecast(config: RunConfig, quiet: bool = False) -> int:
    out_dir = Path(config.out)
    config.archive(out_dir)
    datasets = load_datasets(config)
    tau = config.tau if config.mode == "simifed" else -1.0
    result = run_federation(
        datasets,
        config.rounds,
        tau,
        config.federation_config(),
        show_progress=not quiet,
    )
    forecast_outputs(result, out_dir)

    if not quiet:
        table = Table(title=f"Federated forecasting ({config.mode})")
        for column in ("Round", "Selected", "MAE", "MSE", "Accuracy %", "Calibration"):
            table.add_column(column, justify="right")
        for record in result.rounds:
            row = record.to_row()
            table.add_row(
                str(row["round"]),
                f"{row['selected_count']}/{row['client_count']}",
                *(f"{row[k]:.4f}" if row[k] is not None else "-" for k in ("mae", "mse", "accuracy_pct", "calibration")),
            )
        console.print(table)
        console.print(f"[green]Results written to {out_dir}[/green]")
    return EXIT_OK


# -- mine --------------------------------------------------------------------


def sweep_minsup(
    db: TDTdb,
    sweep: tuple[float, ...],
    out_dir: Path,
    max_itemsets: Optional[int],
    max_itemset_size: Optional[int],
    window_length: Optional[int] = None,
) -> list[dict]:
    """One pattern report per minSup value plus the instrumentation rows."""
    rows = []
    fsp = extract_sequences(db, Outcome.FAILED)
    ssp = extract_sequences(db, Outcome.SUCCEEDED)
    for min_sup in sweep:
        knowledge = mine_knowledge(db, min_sup, window_length, max_itemsets, max_itemset_size)
        pattern_report(knowledge, out_dir / f"patterns_minsup_{min_sup:g}.csv")
        for outcome, seqdb in ((Outcome.FAILED, fsp), (Outcome.SUCCEEDED, ssp)):
            threshold = absolute_min_sup(min_sup, len(seqdb)) if seqdb else 1
            run = run_mining(seqdb, threshold, max_itemsets, max_itemset_size)
            rows.append({"min_sup": min_sup, "outcome": outcome.value, "sequence_count": len(seqdb),
                         "abs_min_sup": threshold, **mining_metrics(run)})
    write_csv(
        rows,
        out_dir / "mining_metrics.csv",
        ["min_sup", "outcome", "sequence_count", "abs_min_sup", "pattern_count", "runtime_ms", "peak_memory_bytes"],
    )
    return rows


def cmd_mine(config: RunConfig, quiet: bool = False) -> int:
    if not config.tdtdb:
        raise ConfigError("mine needs a TDTdb file (--tdtdb or tdtdb=...)", "tdtdb")
    path = Path(config.tdtdb)
    if not path.exists():
        raise FileNotFoundError(f"TDTdb file not found: {path}")
    db = import_jsonl(path)
    out_dir = Path(config.out)
    config.archive(out_dir)
    rows = sweep_minsup(
        db,
        config.minsup_sweep,
        out_dir,
        _limit(config.max_itemsets),
        _limit(config.max_itemset_size),
        _limit(config.window_length),
    )
    if not quiet:
        table = Table(title=f"minSup sweep over {len(db)} records")
        for column in ("minSup", "Outcome", "Patterns", "Runtime ms", "Peak KiB"):
            table.add_column(column, justify="right")
        for row in rows:
            table.add_row(
                f"{row['min_sup']:g}",
                row["outcome"],
                str(row["pattern_count"]),
                f"{row['runtime_ms']:.1f}",
                f"{row['peak_memory_bytes'] / 1024:.1f}",
            )
        console.print(table)
    return EXIT_OK


# -- simulate ----------------------------------------------------------------


def simulation_outputs(result: ExperimentResult, config: RunConfig, out_dir: Path) -> None:
    write_metrics(result.metrics, out_dir / METRICS_FILE)
    write_jsonl(result.events, out_dir / EVENTS_FILE)
    context = ["mode", "app_size", "horizon_min", "tick"]
    write_csv(
        [{k: r[k] for k in (*context, "round", "accuracy_pct")} for r in result.rounds],
        out_dir / "accuracy_vs_round.csv",
        [*context, "round", "accuracy_pct"],
    )
    write_csv(
        [{k: r[k] for k in (*context, "calibration")} for r in result.rounds],
        out_dir / "calibration_vs_time.csv",
        [*context, "calibration"],
    )
    write_csv(result.losses, out_dir / "loss_vs_epoch.csv", [*context, "round", "epoch", "loss"])
    write_csv(
        result.comparison_rows(),
        out_dir / "mode_comparison.csv",
        ["mode", "app_size", "horizon_min", "mtbf_min", "mttr_min", "availability_pct"],
    )

    mined = [key for key in result.tdtdbs if key[0] != "none"] or list(result.tdtdbs)
    if mined:
        key = mined[-1]
        db = result.tdtdbs[key]
        export_jsonl(db, out_dir / "tdtdb.jsonl")
        sim = config.sim_config()
        sweep_minsup(db, config.minsup_sweep, out_dir / "minsup", sim.max_pattern_itemsets, sim.max_itemset_size)


def cmd_simulate(config: RunConfig, quiet: bool = False) -> int:
    out_dir = Path(config.out)
    config.archive(out_dir)
    sim_config = config.sim_config()
    result = run_experiment(sim_config, show_progress=not quiet)
    simulation_outputs(result, config, out_dir)
    if len(config.seeds) > 1:
        rows = comparison_rows(sim_config, config.seeds)
        write_csv(rows, out_dir / COMPARISON_STATS_FILE)
        if not quiet:
            for row in rows:
                console.print(
                    f"{row['mode_a']} vs {row['mode_b']} at Size(A)={row['app_size']}, T={row['horizon_min']}: "
                    f"median AV diff {row['median_difference']:+.4f}, p={row['p_value']:.4f}"
                )
    elif config.seeds:
        logger.warning(f"COMPARISON_SKIPPED: paired comparison needs at least 2 seeds, got {len(config.seeds)}")
    if not quiet:
        console.print(metrics_table(result.metrics))
        console.print(f"[green]Results written to {out_dir}[/green]")
    return EXIT_OK


# -- report ------------------------------------------------------------------


def cmd_report(run_dir: Path, quiet: bool = False) -> int:
    path = write_summary(run_dir)
    if not quiet:
        console.print(Panel(path.read_text(), title="Run summary", border_style="green"))
    return EXIT_OK


def run(argv: Optional[list[str]] = None) -> int:
    """Parse arguments, dispatch and map failures to exit codes."""
    parser = create_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    try:
        if args.command == "report":
            return cmd_report(Path(args.run_dir), args.quiet)
        config = resolve_config(args)
        if args.command == "forecast":
            return cmd_forecast(config, args.quiet)
        if args.command == "mine":
            return cmd_mine(config, args.quiet)
        return cmd_simulate(config, args.quiet)
    except ConfigError as e:
        console.print(f"[red]Config error: {e}[/red]")
        return EXIT_CONFIG
    except INPUT_ERRORS as e:
        console.print(f"[red]Input error: {e}[/red]")
        return EXIT_INPUT
    except InvariantViolation as e:
        console.print(f"[red]Invariant violation: {e}[/red]")
        return EXIT_INVARIANT
    except CellError as e:
        logger.error(f"CELL_FAILED: {e}")
        console.print(f"[red]Simulation cell failed: {e}[/red]")
        return EXIT_INVARIANT


def main():
    """Main CLI entrypoint."""
    sys.exit(run())


if __name__ == "__main__":
    main()

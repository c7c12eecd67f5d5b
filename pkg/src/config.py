"""Run configuration: flat key=value files plus command-line overrides."""

import logging
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping, Optional, get_args, get_origin

from dotenv import dotenv_values

from .forecast.federation import FederationConfig
from .forecast.training import TrainingConfig
from .simkernel.kernel import SimConfig

logger = logging.getLogger(__name__)

ARCHIVE_FILE = "run_config.env"
TRUE_VALUES = {"true", "1", "yes", "on"}
FALSE_VALUES = {"false", "0", "no", "off"}


class ConfigError(ValueError):
    """Unknown key or unparseable value."""

    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(message)


def _default_out_dir() -> str:
    return os.getenv("SFDTM_OUT_DIR", "runs/latest")


@dataclass(frozen=True)
class RunConfig:
    """
    Every key the CLI accepts, with its default.

    Lists are comma-separated in files and overrides. An empty path means
    "not given"; 0 for window_length, max_itemsets and max_itemset_size
    means "no limit".
    """

    seed: int = 0
    out: str = field(default_factory=_default_out_dir)

    # inputs
    trace: str = ""
    synthetic: bool = True
    assignment: str = ""
    tdtdb: str = ""
    synthetic_clients: int = 3
    synthetic_duration_min: int = 480
    synthetic_correlation: float = 0.8
    synthetic_outliers: int = 1

    # forecast
    mode: str = "simifed"
    rounds: int = 10
    tau: float = 0.9
    window: int = 12
    horizon: int = 1
    normalize: bool = True
    hidden_size: int = 16
    lr: float = 0.01
    epochs: int = 20
    batch_size: int = 32
    optimizer: str = "adam"
    aggregation_mode: str = "normalized"
    head: str = "linear"
    max_workers: int = 1

    # mine
    minsup_sweep: tuple[float, ...] = (0.009, 0.040, 0.065, 0.100, 0.250)
    window_length: int = 0
    max_itemsets: int = 0
    max_itemset_size: int = 0

    # simulate
    modes: tuple[str, ...] = ("simifed", "fed", "none")
    sizes: tuple[int, ...] = (10, 20, 40, 60, 80, 100)
    horizons: tuple[int, ...] = (50, 100, 200, 400)
    seeds: tuple[int, ...] = ()
    tick_min: int = 5
    history_min: int = 240
    retrain_ticks: int = 10
    mttr_base_min: float = 0.21
    min_sup: float = 0.1
    initial_rounds: int = 3
    local_epochs: int = 5
    sim_hidden_size: int = 8
    headroom: float = 0.1
    threshold_fraction: float = 0.9
    target_failure: float = 0.05
    mvp_mode: str = "literal"
    max_versions: int = 5
    pattern_guidance: bool = True
    replication: bool = True
    autoscale: bool = True
    fault_injection: bool = True
    random_fault_rate: float = 0.0
    correlation: float = 0.8
    outlier_fraction: float = 0.2

    def training_config(self) -> TrainingConfig:
        return TrainingConfig(
            lr=self.lr,
            epochs=self.epochs,
            batch_size=self.batch_size,
            optimizer=self.optimizer,
            seed=self.seed,
        )

    def federation_config(self) -> FederationConfig:
        return FederationConfig(
            training=self.training_config(),
            hidden_size=self.hidden_size,
            aggregation_mode=self.aggregation_mode,
            head=self.head,
            seed=self.seed,
            max_workers=self.max_workers,
        )

    def sim_config(self) -> SimConfig:
        return SimConfig(
            tick_min=self.tick_min,
            horizons=self.horizons,
            app_sizes=self.sizes,
            modes=self.modes,
            seed=self.seed,
            mttr_base_min=self.mttr_base_min,
            tau=self.tau,
            history_min=self.history_min,
            window=self.window,
            retrain_ticks=self.retrain_ticks,
            initial_rounds=self.initial_rounds,
            local_epochs=self.local_epochs,
            hidden_size=self.sim_hidden_size,
            lr=self.lr,
            headroom=self.headroom,
            threshold_fraction=self.threshold_fraction,
            replication=self.replication,
            target_failure=self.target_failure,
            mvp_mode=self.mvp_mode,
            max_versions=self.max_versions,
            pattern_guidance=self.pattern_guidance,
            min_sup=self.min_sup,
            min_sup_sweep=self.minsup_sweep,
            autoscale=self.autoscale,
            fault_injection=self.fault_injection,
            random_fault_rate=self.random_fault_rate,
            correlation=self.correlation,
            outlier_fraction=self.outlier_fraction,
        )

    def to_env(self) -> str:
        """Serialize every key, in declaration order."""
        return "".join(f"{f.name}={_format(getattr(self, f.name))}\n" for f in fields(self))

    def archive(self, out_dir: Optional[Path] = None) -> Path:
        out_dir = Path(out_dir or self.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / ARCHIVE_FILE
        path.write_text(self.to_env())
        return path


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(_format(v) for v in value)
    return str(value)


def _parse_scalar(key: str, kind: type, raw: str) -> Any:
    text = raw.strip()
    if kind is bool:
        lowered = text.lower()
        if lowered in TRUE_VALUES:
            return True
        if lowered in FALSE_VALUES:
            return False
        raise ConfigError(f"{key}: expected true/false, got {raw!r}", key)
    try:
        return kind(text)
    except ValueError as e:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind.__name__}", key) from e


def parse_value(key: str, raw: str) -> Any:
    """Convert a raw string to the declared type of key."""
    kinds = {f.name: f.type for f in fields(RunConfig)}
    if key not in kinds:
        raise ConfigError(f"Unknown config key: {key}", key)
    kind = kinds[key]
    if get_origin(kind) is tuple:
        item_kind = get_args(kind)[0]
        items = [part for part in raw.split(",") if part.strip()]
        return tuple(_parse_scalar(key, item_kind, part) for part in items)
    return _parse_scalar(key, kind, raw)


def parse_overrides(pairs: list[str]) -> dict[str, str]:
    """Split `key=value` strings from --set."""
    overrides = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"Override must be key=value, got {pair!r}")
        overrides[key.strip()] = value
    return overrides


def load_config(
    path: Optional[Path] = None,
    overrides: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """
    Defaults, then the file, then overrides.

    Raises:
        ConfigError: unknown key, bad value, missing file or invalid combination
    """
    raw: dict[str, str] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Config file not found: {path}")
        raw.update({k: v or "" for k, v in dotenv_values(path).items()})
    raw.update(overrides or {})

    values = {key: parse_value(key, value) for key, value in raw.items()}
    config = replace(RunConfig(), **values)
    if config.mode not in ("simifed", "fed"):
        raise ConfigError(f"mode must be simifed or fed, got {config.mode!r}", "mode")
    try:
        config.federation_config()
        config.sim_config()
    except ValueError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e
    logger.debug(f"Loaded config with {len(values)} explicit keys")
    return config

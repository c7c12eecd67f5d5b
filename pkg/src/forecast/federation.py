"""Similarity-based federated learning over per-client LSTM models."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from tqdm import tqdm

from ..trace.windowing import WindowedDataset
from .lstm import DimensionMismatch, LSTMParams, init_params, predict
from .metrics import EmptyTestSet, ForecastReport, evaluate
from .similarity import DEFAULT_TAU, select_similar
from .training import LocalUpdate, TrainingConfig, TrainingCurve, train_local

logger = logging.getLogger(__name__)

AGGREGATION_MODES = ("normalized", "literal")


@dataclass
class GlobalModel:
    """Shared parameters plus the clients selected in the last round."""

    theta: LSTMParams
    round: int = 0
    selected_clients: list[str] = field(default_factory=list)

    def copy(self) -> "GlobalModel":
        return GlobalModel(self.theta.copy(), self.round, list(self.selected_clients))


@dataclass(frozen=True)
class FederationConfig:
    """Model shape and per-round settings shared by every client."""

    training: TrainingConfig = field(default_factory=TrainingConfig)
    hidden_size: int = 16
    aggregation_mode: str = "normalized"
    head: str = "linear"
    seed: int = 0
    max_workers: int = 1

    def __post_init__(self):
        if self.aggregation_mode not in AGGREGATION_MODES:
            raise ValueError(
                f"Unknown aggregation mode: {self.aggregation_mode}. "
                f"Use one of {AGGREGATION_MODES}."
            )
        if self.hidden_size < 1 or self.max_workers < 1:
            raise ValueError("hidden_size and max_workers must be >= 1")


@dataclass
class RoundRecord:
    """Outcome of one communication round."""

    round: int
    client_count: int
    selected: list[str]
    report: Optional[ForecastReport]

    def to_row(self) -> dict:
        row = {
            "round": self.round,
            "client_count": self.client_count,
            "selected_count": len(self.selected),
        }
        if self.report is not None:
            row.update(
                mae=self.report.mean_abs_error,
                mse=self.report.mse,
                accuracy_pct=self.report.accuracy_pct,
                calibration=self.report.calibration,
            )
        else:
            row.update(mae=None, mse=None, accuracy_pct=None, calibration=None)
        return row


@dataclass
class FederationResult:
    """Final global model, per-round records and local training curves."""

    model: GlobalModel
    rounds: list[RoundRecord] = field(default_factory=list)
    curves: dict[str, list[TrainingCurve]] = field(default_factory=dict)

    @property
    def reports(self) -> list[ForecastReport]:
        return [r.report for r in self.rounds if r.report is not None]

    @property
    def calibration(self) -> list[float]:
        return [r.calibration for r in self.reports]


def aggregate_vectors(
    theta: NDArray[np.float64],
    deltas: Sequence[NDArray[np.float64]],
    data_sizes: Sequence[int],
    total_data_size: Optional[int] = None,
) -> NDArray[np.float64]:
    """
    theta + sum_k w_k * delta_k.

    With total_data_size None the weights are |D_k| / sum of selected sizes
    and sum to 1; otherwise they are |D_k| / total_data_size.
    """
    if len(deltas) != len(data_sizes) or not deltas:
        raise ValueError("Need one data size per delta and at least one delta")
    denominator = float(sum(data_sizes) if total_data_size is None else total_data_size)
    if denominator <= 0:
        raise ValueError(f"Total data size must be positive, got {denominator}")

    result = np.array(theta, dtype=np.float64, copy=True)
    for delta, size in zip(deltas, data_sizes):
        delta = np.asarray(delta, dtype=np.float64)
        if delta.shape != result.shape:
            raise DimensionMismatch(
                f"Delta of shape {delta.shape} does not match parameters {result.shape}"
            )
        result += (size / denominator) * delta
    return result


def aggregate(
    global_model: GlobalModel,
    selected: list[LocalUpdate],
    mode: str = "normalized",
    total_data_size: Optional[int] = None,
) -> GlobalModel:
    """
    Fold the selected local updates into the global model.

    Args:
        global_model: Current global model
        selected: Updates chosen by select_similar
        mode: "normalized" weights by the selected data sizes;
            "literal" weights by |D_k| / |D| over all clients
        total_data_size: |D| over all n clients (literal mode)

    Returns:
        New GlobalModel with round incremented
    """
    if mode not in AGGREGATION_MODES:
        raise ValueError(f"Unknown aggregation mode: {mode}. Use one of {AGGREGATION_MODES}.")
    if mode == "literal" and total_data_size is None:
        raise ValueError("Literal aggregation needs the total data size of all clients")

    theta = aggregate_vectors(
        global_model.theta.to_vector(),
        [u.delta for u in selected],
        [u.data_size for u in selected],
        total_data_size if mode == "literal" else None,
    )
    return GlobalModel(
        theta=global_model.theta.from_vector(theta),
        round=global_model.round + 1,
        selected_clients=sorted(u.client_id for u in selected),
    )


def _client_seed(seed: int, round_index: int, client_index: int) -> int:
    return int(np.random.SeedSequence([seed, round_index, client_index]).generate_state(1)[0])


def _train_round(
    model: GlobalModel,
    datasets: list[WindowedDataset],
    config: FederationConfig,
    round_index: int,
) -> list[tuple[LocalUpdate, TrainingCurve]]:
    def run(item: tuple[int, WindowedDataset]):
        k, dataset = item
        training = replace(config.training, seed=_client_seed(config.seed, round_index, k))
        return train_local(dataset, model.theta, training)

    items = list(enumerate(datasets))
    if config.max_workers == 1:
        return [run(item) for item in items]
    with ThreadPoolExecutor(max_workers=config.max_workers) as pool:
        return list(pool.map(run, items))


def initial_model(sample: WindowedDataset, config: FederationConfig) -> GlobalModel:
    """Seeded initialization shaped after a client's dataset."""
    _, horizon, n_targets = sample.targets.shape
    theta = init_params(
        input_size=sample.inputs.shape[2],
        hidden_size=config.hidden_size,
        horizon=horizon,
        n_targets=n_targets,
        seed=config.seed,
        head=config.head,
    )
    return GlobalModel(theta=theta)


def run_federation(
    datasets: Mapping[str, WindowedDataset],
    rounds: int,
    tau: float = DEFAULT_TAU,
    config: Optional[FederationConfig] = None,
    eval_clients: Optional[Sequence[str]] = None,
    initial: Optional[GlobalModel] = None,
    show_progress: bool = False,
) -> FederationResult:
    """
    Broadcast, train locally, select similar clients and aggregate for z rounds.

    Only LocalUpdate values cross from the clients into aggregation.

    Args:
        datasets: Windowed data keyed by client id (n >= 2)
        rounds: Number of communication rounds z
        tau: Similarity threshold (-1 selects every client)
        config: Federation settings
        eval_clients: Clients whose test split is scored each round (default all)
        initial: Starting model (default a seeded initialization)
        show_progress: Display a progress bar over rounds

    Returns:
        FederationResult with the final model and per-round records
    """
    config = config or FederationConfig()
    if len(datasets) < 2:
        raise ValueError(f"Federation needs at least 2 clients, got {len(datasets)}")
    if rounds < 0:
        raise ValueError(f"rounds must be >= 0, got {rounds}")

    client_ids = sorted(datasets)
    ordered = [datasets[c] for c in client_ids]
    eval_sets = [datasets[c] for c in (eval_clients or client_ids)]
    total_size = sum(d.train_size for d in ordered)

    model = initial.copy() if initial is not None else initial_model(ordered[0], config)
    result = FederationResult(model=model, curves={c: [] for c in client_ids})

    for r in tqdm(range(rounds), desc="Federation rounds", disable=not show_progress, unit="round"):
        try:
            trained = _train_round(model, ordered, config, r)
            updates = [u for u, _ in trained]
            selected = select_similar(updates, tau)
            model = aggregate(model, selected, config.aggregation_mode, total_size)
        except (ValueError, RuntimeError) as e:
            raise RuntimeError(f"Federation round {r} failed: {e}") from e

        for update, curve in trained:
            result.curves[update.client_id].append(curve)
        try:
            report = evaluate(model, eval_sets)
        except EmptyTestSet:
            report = None
        result.rounds.append(
            RoundRecord(
                round=model.round,
                client_count=len(client_ids),
                selected=model.selected_clients,
                report=report,
            )
        )
        logger.info(
            f"Round {model.round}: selected {len(selected)}/{len(client_ids)}"
            + (f", mse={report.mse:.6f}" if report else "")
        )

    result.model = model
    return result


def forecast_recursive(
    params: LSTMParams,
    windows: NDArray[np.float64],
    steps: int,
    target_columns: Sequence[int] = (0, 1),
) -> NDArray[np.float64]:
    """
    Roll a model forward by feeding its forecasts back as inputs.

    Features that are not forecast are carried forward from the last step.

    Args:
        params: Model parameters
        windows: (W, F) window or (N, W, F) batch
        steps: Number of future steps
        target_columns: Input columns the targets correspond to

    Returns:
        (steps, n_targets) or (N, steps, n_targets) forecasts
    """
    windows = np.array(windows, dtype=np.float64, copy=True)
    single = windows.ndim == 2
    if single:
        windows = windows[None, :, :]
    n, width, _ = windows.shape
    cols = list(target_columns)
    out = np.zeros((n, 0, params.n_targets))
    while out.shape[1] < steps:
        take = predict(params, windows)[:, : steps - out.shape[1]]
        out = np.concatenate([out, take], axis=1)
        rows = np.repeat(windows[:, -1:, :], take.shape[1], axis=1)
        rows[:, :, cols] = take
        windows = np.concatenate([windows, rows], axis=1)[:, -width:]
    return out[0] if single else out

"""Versioned JSON checkpoints of the global model."""

import json
from pathlib import Path

import numpy as np

from .federation import GlobalModel
from .lstm import PARAM_NAMES, LSTMParams

CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    """Checkpoint file is unreadable or has the wrong version or shapes."""


def save_checkpoint(model: GlobalModel, path: Path) -> None:
    """
    Write the model with a shape header.

    Floats are written with repr precision, so loading is exact.
    """
    theta = model.theta
    payload = {
        "version": CHECKPOINT_VERSION,
        "round": model.round,
        "selected_clients": list(model.selected_clients),
        "horizon": theta.horizon,
        "n_targets": theta.n_targets,
        "head": theta.head,
        "shapes": {name: list(getattr(theta, name).shape) for name in PARAM_NAMES},
        "params": {name: getattr(theta, name).ravel().tolist() for name in PARAM_NAMES},
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2)


def load_checkpoint(path: Path) -> GlobalModel:
    """
    Read a checkpoint written by save_checkpoint.

    Raises:
        CheckpointError: on a version or shape mismatch
    """
    try:
        with open(path) as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e

    version = payload.get("version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"Unsupported checkpoint version {version}, expected {CHECKPOINT_VERSION}"
        )

    arrays = {}
    for name in PARAM_NAMES:
        shape = tuple(payload["shapes"][name])
        values = np.asarray(payload["params"][name], dtype=np.float64)
        if values.size != int(np.prod(shape)):
            raise CheckpointError(f"Parameter {name} has {values.size} values for shape {shape}")
        arrays[name] = values.reshape(shape)

    try:
        theta = LSTMParams(
            **arrays,
            horizon=payload["horizon"],
            n_targets=payload["n_targets"],
            head=payload["head"],
        )
    except ValueError as e:
        raise CheckpointError(f"Invalid checkpoint parameters: {e}") from e

    return GlobalModel(
        theta=theta,
        round=payload["round"],
        selected_clients=list(payload["selected_clients"]),
    )

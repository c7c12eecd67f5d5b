"""Local (per-client) training with mini-batch Adam."""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from ..trace.windowing import WindowedDataset
from .lstm import LSTMParams, loss_and_grad

logger = logging.getLogger(__name__)

OPTIMIZERS = ("adam", "sgd")


class DivergedTraining(RuntimeError):
    """Training loss became NaN or Inf."""

    def __init__(self, client_id: str, epoch: int, loss: float):
        self.client_id = client_id
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"Training diverged for client {client_id} at epoch {epoch} (loss={loss})")


@dataclass(frozen=True)
class TrainingConfig:
    """Local optimizer settings."""

    lr: float = 0.01
    epochs: int = 20
    batch_size: int = 32
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    # Relative epoch-over-epoch loss increase tolerated before flagging.
    divergence_tolerance: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"Unknown optimizer: {self.optimizer}. Use one of {OPTIMIZERS}.")
        if self.epochs < 0 or self.batch_size < 1 or self.lr <= 0:
            raise ValueError("epochs >= 0, batch_size >= 1 and lr > 0 are required")


@dataclass(frozen=True)
class LocalUpdate:
    """Parameter delta shared by one client; raw usage never leaves the client."""

    client_id: str
    delta: NDArray[np.float64]
    data_size: int
    usage_signature: NDArray[np.float64]

    def __post_init__(self):
        if self.data_size < 1:
            raise ValueError(f"data_size must be >= 1, got {self.data_size}")
        if not np.all(np.isfinite(self.delta)):
            raise ValueError(f"Update from {self.client_id} has a non-finite delta")


@dataclass
class TrainingCurve:
    """Per-epoch mean training loss."""

    client_id: str
    losses: list[float] = field(default_factory=list)
    diverged: bool = False


class AdamOptimizer:
    """Adam over a flat parameter vector."""

    def __init__(self, size: int, lr: float, beta1: float, beta2: float, eps: float):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, theta: NDArray[np.float64], grad: NDArray[np.float64]) -> NDArray[np.float64]:
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad ** 2
        m_hat = self.m / (1 - self.beta1 ** self.t)
        v_hat = self.v / (1 - self.beta2 ** self.t)
        return theta - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


class SGDOptimizer:
    """Plain gradient descent."""

    def __init__(self, lr: float):
        self.lr = lr

    def step(self, theta: NDArray[np.float64], grad: NDArray[np.float64]) -> NDArray[np.float64]:
        return theta - self.lr * grad


def _make_optimizer(config: TrainingConfig, size: int):
    if config.optimizer == "adam":
        return AdamOptimizer(size, config.lr, config.beta1, config.beta2, config.eps)
    return SGDOptimizer(config.lr)


def train_local(
    dataset: WindowedDataset,
    init: LSTMParams,
    config: Optional[TrainingConfig] = None,
) -> tuple[LocalUpdate, TrainingCurve]:
    """
    Train a client's local model starting from the broadcast parameters.

    Args:
        dataset: The client's own windowed data (train split is used)
        init: Broadcast global parameters
        config: Optimizer settings

    Returns:
        (LocalUpdate with delta = theta_after - theta_before, per-epoch curve)

    Raises:
        DivergedTraining: if the loss becomes NaN or Inf
    """
    config = config or TrainingConfig()
    if dataset.train_size == 0:
        raise ValueError(f"Client {dataset.client_id} has an empty training split")

    inputs = dataset.train_inputs
    targets = dataset.train_targets
    n = len(inputs)
    theta0 = init.to_vector()
    theta = theta0.copy()
    optimizer = _make_optimizer(config, theta.size)
    rng = np.random.default_rng(config.seed)
    curve = TrainingCurve(client_id=dataset.client_id)

    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            loss, grad = loss_and_grad(init.from_vector(theta), inputs[batch], targets[batch])
            if not np.isfinite(loss):
                raise DivergedTraining(dataset.client_id, epoch, loss)
            theta = optimizer.step(theta, grad.to_vector())
            if not np.all(np.isfinite(theta)):
                raise DivergedTraining(dataset.client_id, epoch, float("nan"))
            total += loss * len(batch)
        epoch_loss = total / n

        if curve.losses and epoch_loss > curve.losses[-1] * (1 + config.divergence_tolerance):
            if not curve.diverged:
                logger.warning(
                    f"TRAINING_DIVERGENCE: client {dataset.client_id} loss rose from "
                    f"{curve.losses[-1]:.6f} to {epoch_loss:.6f} at epoch {epoch}"
                )
            curve.diverged = True
        curve.losses.append(epoch_loss)

    update = LocalUpdate(
        client_id=dataset.client_id,
        delta=theta - theta0,
        data_size=n,
        usage_signature=dataset.usage_signature(),
    )
    return update, curve

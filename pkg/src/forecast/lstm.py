"""Single-layer LSTM regressor with an analytic backward pass."""

from dataclasses import dataclass, fields
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit

HEAD_MODES = ("linear", "relu", "softmax")
PARAM_NAMES = ("W", "U", "b", "V", "c")


class DimensionMismatch(ValueError):
    """Input or parameter shapes do not line up."""


@dataclass
class LSTMParams:
    """
    LSTM weights with gates stacked in input/forget/cell/output order.

    W: (4*hidden, input_size) input weights
    U: (4*hidden, hidden) recurrent weights
    b: (4*hidden,) gate biases
    V: (horizon*n_targets, hidden) output head weights
    c: (horizon*n_targets,) output head bias
    """

    W: NDArray[np.float64]
    U: NDArray[np.float64]
    b: NDArray[np.float64]
    V: NDArray[np.float64]
    c: NDArray[np.float64]
    horizon: int = 1
    n_targets: int = 1
    head: str = "linear"

    def __post_init__(self):
        self.validate()

    @property
    def hidden_size(self) -> int:
        return self.U.shape[1]

    @property
    def input_size(self) -> int:
        return self.W.shape[1]

    @property
    def output_size(self) -> int:
        return self.horizon * self.n_targets

    def validate(self) -> None:
        """Check shapes, head mode and finiteness."""
        h = self.U.shape[1] if self.U.ndim == 2 else -1
        expected = {
            "W": (4 * h, self.W.shape[1] if self.W.ndim == 2 else -1),
            "U": (4 * h, h),
            "b": (4 * h,),
            "V": (self.horizon * self.n_targets, h),
            "c": (self.horizon * self.n_targets,),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise DimensionMismatch(f"{name} has shape {actual}, expected {shape}")
        if self.head not in HEAD_MODES:
            raise ValueError(f"Unknown head mode: {self.head}. Use one of {HEAD_MODES}.")
        for name in PARAM_NAMES:
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"Parameter {name} contains NaN or Inf")

    def to_vector(self) -> NDArray[np.float64]:
        """Flatten all parameters in PARAM_NAMES order."""
        return np.concatenate([getattr(self, n).ravel() for n in PARAM_NAMES])

    def from_vector(self, vector: NDArray[np.float64]) -> "LSTMParams":
        """Parameters with this object's shapes filled from a flat vector."""
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.size,):
            raise DimensionMismatch(
                f"Vector of shape {vector.shape} does not match {self.size} parameters"
            )
        arrays = {}
        offset = 0
        for name in PARAM_NAMES:
            shape = getattr(self, name).shape
            count = int(np.prod(shape))
            arrays[name] = vector[offset:offset + count].reshape(shape).copy()
            offset += count
        return LSTMParams(
            **arrays, horizon=self.horizon, n_targets=self.n_targets, head=self.head
        )

    @property
    def size(self) -> int:
        return sum(getattr(self, n).size for n in PARAM_NAMES)

    def copy(self) -> "LSTMParams":
        return self.from_vector(self.to_vector())

    def zeros_like(self) -> "LSTMParams":
        return self.from_vector(np.zeros(self.size))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LSTMParams):
            return NotImplemented
        return (
            self.horizon == other.horizon
            and self.n_targets == other.n_targets
            and self.head == other.head
            and all(
                getattr(self, f.name).shape == getattr(other, f.name).shape
                and np.array_equal(getattr(self, f.name), getattr(other, f.name))
                for f in fields(self)
                if f.name in PARAM_NAMES
            )
        )


def init_params(
    input_size: int,
    hidden_size: int = 16,
    horizon: int = 1,
    n_targets: int = 1,
    seed: int = 0,
    head: str = "linear",
) -> LSTMParams:
    """Uniform(-1/sqrt(hidden), 1/sqrt(hidden)) weights, forget-gate bias 1."""
    rng = np.random.default_rng(seed)
    bound = 1.0 / np.sqrt(hidden_size)
    out = horizon * n_targets
    b = np.zeros(4 * hidden_size)
    b[hidden_size:2 * hidden_size] = 1.0
    return LSTMParams(
        W=rng.uniform(-bound, bound, (4 * hidden_size, input_size)),
        U=rng.uniform(-bound, bound, (4 * hidden_size, hidden_size)),
        b=b,
        V=rng.uniform(-bound, bound, (out, hidden_size)),
        c=np.zeros(out),
        horizon=horizon,
        n_targets=n_targets,
        head=head,
    )


def _apply_head(logits: NDArray[np.float64], head: str) -> NDArray[np.float64]:
    if head == "linear":
        return logits
    if head == "relu":
        return np.maximum(logits, 0.0)
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _head_backward(
    dy: NDArray[np.float64],
    logits: NDArray[np.float64],
    y: NDArray[np.float64],
    head: str,
) -> NDArray[np.float64]:
    if head == "linear":
        return dy
    if head == "relu":
        return dy * (logits > 0)
    return y * (dy - np.sum(dy * y, axis=1, keepdims=True))


def _check_inputs(params: LSTMParams, inputs: NDArray[np.float64]) -> None:
    if inputs.ndim != 3 or inputs.shape[2] != params.input_size:
        raise DimensionMismatch(
            f"Expected inputs of shape (N, W, {params.input_size}), got {inputs.shape}"
        )
    if inputs.shape[1] < 1:
        raise DimensionMismatch("Input windows must have at least one step")


def _forward(params: LSTMParams, inputs: NDArray[np.float64]):
    n, steps, _ = inputs.shape
    hs = params.hidden_size
    h = np.zeros((n, hs))
    c = np.zeros((n, hs))
    cache = []
    for t in range(steps):
        x = inputs[:, t, :]
        z = x @ params.W.T + h @ params.U.T + params.b
        i = expit(z[:, :hs])
        f = expit(z[:, hs:2 * hs])
        g = np.tanh(z[:, 2 * hs:3 * hs])
        o = expit(z[:, 3 * hs:])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        cache.append((x, h, c, i, f, g, o, tc))
        h = o * tc
        c = c_new
    logits = h @ params.V.T + params.c
    return _apply_head(logits, params.head), logits, h, cache


def predict(params: LSTMParams, inputs: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    Batched forecast.

    Args:
        params: Model parameters
        inputs: (N, W, F) windows

    Returns:
        (N, horizon, n_targets) forecasts
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    _check_inputs(params, inputs)
    y, _, _, _ = _forward(params, inputs)
    return y.reshape(len(inputs), params.horizon, params.n_targets)


def lstm_forward(params: LSTMParams, window: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    Forecast from one input window; the hidden state starts at zero.

    Args:
        params: Model parameters
        window: (W, F) input sequence

    Returns:
        (horizon, n_targets) forecast
    """
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2:
        raise DimensionMismatch(f"Expected a (W, F) window, got shape {window.shape}")
    return predict(params, window[None, :, :])[0]


def loss_and_grad(
    params: LSTMParams,
    inputs: NDArray[np.float64],
    targets: NDArray[np.float64],
) -> tuple[float, LSTMParams]:
    """
    MSE loss and its gradient by backpropagation through time.

    Args:
        params: Model parameters
        inputs: (N, W, F) windows
        targets: (N, horizon, n_targets) values

    Returns:
        (loss, gradient with the same layout as params)
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    _check_inputs(params, inputs)
    n = len(inputs)
    target_flat = np.asarray(targets, dtype=np.float64).reshape(n, -1)
    if target_flat.shape[1] != params.output_size:
        raise DimensionMismatch(
            f"Targets have {target_flat.shape[1]} values per sample, "
            f"model outputs {params.output_size}"
        )

    y, logits, h_last, cache = _forward(params, inputs)
    err = y - target_flat
    loss = float(np.mean(err ** 2))

    dy = 2.0 * err / err.size
    dlogits = _head_backward(dy, logits, y, params.head)
    dV = dlogits.T @ h_last
    dc = dlogits.sum(axis=0)

    hs = params.hidden_size
    dW = np.zeros_like(params.W)
    dU = np.zeros_like(params.U)
    db = np.zeros_like(params.b)
    dh = dlogits @ params.V
    dc_next = np.zeros((n, hs))
    for x, h_prev, c_prev, i, f, g, o, tc in reversed(cache):
        do = dh * tc
        dcell = dc_next + dh * o * (1.0 - tc ** 2)
        di = dcell * g
        dg = dcell * i
        df = dcell * c_prev
        dc_next = dcell * f
        dz = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g ** 2),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        dW += dz.T @ x
        dU += dz.T @ h_prev
        db += dz.sum(axis=0)
        dh = dz @ params.U

    grad = LSTMParams(
        W=dW, U=dU, b=db, V=dV, c=dc,
        horizon=params.horizon, n_targets=params.n_targets, head=params.head,
    )
    return loss, grad


def mse_loss(
    params: LSTMParams,
    inputs: NDArray[np.float64],
    targets: NDArray[np.float64],
) -> float:
    """Mean squared error of the batched forecast."""
    pred = predict(params, inputs)
    return float(np.mean((pred - np.asarray(targets).reshape(pred.shape)) ** 2))


def numerical_gradient(
    params: LSTMParams,
    inputs: NDArray[np.float64],
    targets: NDArray[np.float64],
    step: float = 1e-5,
    indices: Optional[NDArray[np.int64]] = None,
) -> NDArray[np.float64]:
    """Central finite-difference gradient of mse_loss, flat layout."""
    theta = params.to_vector()
    grad = np.zeros_like(theta)
    for k in (range(theta.size) if indices is None else indices):
        plus = theta.copy()
        minus = theta.copy()
        plus[k] += step
        minus[k] -= step
        grad[k] = (
            mse_loss(params.from_vector(plus), inputs, targets)
            - mse_loss(params.from_vector(minus), inputs, targets)
        ) / (2 * step)
    return grad

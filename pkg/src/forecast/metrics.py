"""Forecast error metrics: mean absolute error, MSE, accuracy and calibration."""

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence, Union

import numpy as np
from numpy.typing import NDArray
from sklearn.metrics import mean_absolute_error, mean_squared_error

from ..trace.windowing import WindowedDataset
from .lstm import LSTMParams, predict

if TYPE_CHECKING:
    from .federation import GlobalModel


class EmptyTestSet(ValueError):
    """No test pairs to evaluate."""


@dataclass
class ForecastReport:
    """Error summary over m (actual, predicted) pairs."""

    mean_abs_error: float
    mse: float
    actual: NDArray[np.float64]
    predicted: NDArray[np.float64]
    accuracy_pct: float
    calibration: float

    @property
    def m(self) -> int:
        return len(self.actual)

    def to_dict(self) -> dict:
        return {
            "mae": self.mean_abs_error,
            "mse": self.mse,
            "accuracy_pct": self.accuracy_pct,
            "calibration": self.calibration,
            "m": self.m,
        }


def evaluate_pairs(
    actual: Sequence[float],
    predicted: Sequence[float],
) -> ForecastReport:
    """
    Score predictions against actual values.

    accuracy_pct = 100 * (1 - MAE / range(actual)), clamped to [0, 100]; a
    constant actual series uses range 1.0. calibration is
    |mean(predicted) - mean(actual)|.
    """
    actual = np.asarray(actual, dtype=np.float64).ravel()
    predicted = np.asarray(predicted, dtype=np.float64).ravel()
    if actual.size == 0:
        raise EmptyTestSet("Cannot evaluate an empty test set")
    if actual.shape != predicted.shape:
        raise ValueError(f"Shape mismatch: {actual.shape} vs {predicted.shape}")

    mae = float(mean_absolute_error(actual, predicted))
    mse = float(mean_squared_error(actual, predicted))
    spread = float(actual.max() - actual.min())
    if spread == 0:
        spread = 1.0
    accuracy = float(np.clip(100.0 * (1.0 - mae / spread), 0.0, 100.0))
    calibration = float(abs(predicted.mean() - actual.mean()))
    return ForecastReport(
        mean_abs_error=mae,
        mse=mse,
        actual=actual,
        predicted=predicted,
        accuracy_pct=accuracy,
        calibration=calibration,
    )


def evaluate(
    model: Union["GlobalModel", LSTMParams],
    test: Union[WindowedDataset, Sequence[WindowedDataset]],
) -> ForecastReport:
    """
    Evaluate a model on the test split of one or more clients.

    Raises:
        EmptyTestSet: if no test pairs exist
    """
    params = model if isinstance(model, LSTMParams) else model.theta
    datasets = [test] if isinstance(test, WindowedDataset) else list(test)
    inputs = [d.test_inputs for d in datasets if d.test_size > 0]
    targets = [d.test_targets for d in datasets if d.test_size > 0]
    if not inputs:
        raise EmptyTestSet("No test pairs in the given datasets")

    predicted = predict(params, np.concatenate(inputs))
    return evaluate_pairs(np.concatenate(targets).ravel(), predicted.ravel())

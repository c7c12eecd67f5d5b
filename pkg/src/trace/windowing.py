"""Sliding-window datasets with min-max scaling and the 80:20 train/test split."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from sklearn.preprocessing import MinMaxScaler

from .parser import TraceError
from .series import FEATURES, UsageSeries

DEFAULT_WINDOW = 12
DEFAULT_HORIZON = 1
TRAIN_FRACTION = 0.8
TARGETS = ("cpu_util", "mem_util")


class SeriesTooShort(TraceError):
    """Series cannot hold a single window plus horizon."""

    def __init__(self, length: int, w: int, h: int):
        self.length = length
        super().__init__(f"Series of length {length} is shorter than w + h = {w + h}")


@dataclass(frozen=True)
class WindowedDataset:
    """
    Input windows and horizon targets of one client.

    inputs: (N, W, F) windows over `features`
    targets: (N, H, K) next H values of `targets`
    Pairs [0, split_index) are train, the rest test. When `scaler` is set,
    inputs and targets are in its [0, 1] space.
    """

    client_id: str
    inputs: NDArray[np.float64]
    targets: NDArray[np.float64]
    split_index: int
    features: tuple[str, ...] = FEATURES
    target_names: tuple[str, ...] = TARGETS
    target_columns: tuple[int, ...] = (0, 1)
    scaler: Optional[MinMaxScaler] = None

    @property
    def train_inputs(self) -> NDArray[np.float64]:
        return self.inputs[: self.split_index]

    @property
    def train_targets(self) -> NDArray[np.float64]:
        return self.targets[: self.split_index]

    @property
    def test_inputs(self) -> NDArray[np.float64]:
        return self.inputs[self.split_index:]

    @property
    def test_targets(self) -> NDArray[np.float64]:
        return self.targets[self.split_index:]

    @property
    def train_size(self) -> int:
        return self.split_index

    @property
    def test_size(self) -> int:
        return len(self.inputs) - self.split_index

    def usage_signature(self) -> NDArray[np.float64]:
        """Mean of every input feature over the training windows."""
        if self.train_size == 0:
            return self.inputs.mean(axis=(0, 1))
        return self.train_inputs.mean(axis=(0, 1))

    def inverse_targets(self, values: NDArray[np.float64]) -> NDArray[np.float64]:
        """Map target-shaped values (..., K) back to utilization units."""
        values = np.asarray(values, dtype=np.float64)
        if self.scaler is None:
            return values
        cols = list(self.target_columns)
        return (values - self.scaler.min_[cols]) / self.scaler.scale_[cols]


def window_array(
    values: NDArray[np.float64],
    w: int = DEFAULT_WINDOW,
    h: int = DEFAULT_HORIZON,
    target_columns: Sequence[int] = (0, 1),
    client_id: str = "",
    features: tuple[str, ...] = FEATURES,
    target_names: tuple[str, ...] = TARGETS,
    normalize: bool = False,
) -> WindowedDataset:
    """
    Window a (T, F) array with stride 1.

    With `normalize`, a MinMaxScaler is fitted on the rows the training
    windows cover and applied to the whole array. Test rows may fall
    outside [0, 1].

    Raises:
        SeriesTooShort: if T < w + h
    """
    if w < 1 or h < 1:
        raise ValueError(f"Window and horizon must be >= 1, got w={w}, h={h}")
    length = len(values)
    if length < w + h:
        raise SeriesTooShort(length, w, h)

    count = length - w - h + 1
    split_index = int(np.floor(TRAIN_FRACTION * count))
    values = np.asarray(values, dtype=np.float64)
    scaler = None
    if normalize:
        train_rows = max(split_index, 1) + w + h - 1
        scaler = MinMaxScaler().fit(values[:train_rows])
        values = scaler.transform(values)

    idx = np.arange(count)[:, None]
    inputs = values[idx + np.arange(w)[None, :]]
    targets = values[idx + w + np.arange(h)[None, :]][:, :, list(target_columns)]
    return WindowedDataset(
        client_id=client_id,
        inputs=np.ascontiguousarray(inputs, dtype=np.float64),
        targets=np.ascontiguousarray(targets, dtype=np.float64),
        split_index=split_index,
        features=tuple(features),
        target_names=tuple(target_names),
        target_columns=tuple(target_columns),
        scaler=scaler,
    )


def window(
    series: UsageSeries,
    w: int = DEFAULT_WINDOW,
    h: int = DEFAULT_HORIZON,
    targets: Sequence[str] = TARGETS,
    normalize: bool = False,
) -> WindowedDataset:
    """
    Build (input, target) pairs from a usage series.

    Args:
        series: Gap-free usage series
        w: Window length in samples
        h: Forecast horizon in samples
        targets: Features to forecast
        normalize: Min-max scale features, fitted on the training rows

    Returns:
        WindowedDataset split at floor(0.8 * count)
    """
    target_columns = [FEATURES.index(t) for t in targets]
    return window_array(
        series.as_array(FEATURES),
        w=w,
        h=h,
        target_columns=target_columns,
        client_id=series.client_id,
        target_names=tuple(targets),
        normalize=normalize,
    )

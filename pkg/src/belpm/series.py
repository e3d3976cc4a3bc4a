"""Time-series containers, time-delay embedding, and synthetic benchmark generators.

Everything here is deterministic and immutable after construction, so values
can be shared freely between models and evaluation code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyInput,
    IndexOutOfRange,
    InvalidParameter,
    SeriesTooShort,
)


def _frozen_f64(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise InvalidParameter(f"expected a {ndim}-D array, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled scalar observations.

    ``start_time`` and ``step`` are abstract integer time units (minutes,
    hours, days, ...); the value at position ``j`` is observed at epoch
    ``start_time + j * step``.
    """

    values: np.ndarray
    start_time: int = 0
    step: int = 1

    def __post_init__(self):
        arr = _frozen_f64(self.values, ndim=1)
        if arr.size == 0:
            raise EmptyInput("a time series needs at least one value")
        if not np.all(np.isfinite(arr)):
            raise InvalidParameter("series values must be finite")
        if self.step <= 0:
            raise InvalidParameter(f"step must be positive, got {self.step}")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size

    def time_at(self, index: int) -> int:
        """Epoch of the observation at ``index``."""
        return self.start_time + index * self.step


@dataclass(frozen=True)
class EmbeddedDataset:
    """Aligned (input vector, target) pairs produced by time-delay embedding.

    ``inputs`` has shape (n, r); ``targets`` has shape (n,). Empty datasets
    (n == 0) are legal as split leftovers but are rejected by consumers that
    need samples.
    """

    inputs: np.ndarray
    targets: np.ndarray
    r: int
    horizon: int

    def __post_init__(self):
        inputs = _frozen_f64(self.inputs, ndim=2)
        targets = _frozen_f64(self.targets, ndim=1)
        if self.r < 1:
            raise InvalidParameter(f"embedding dimension must be >= 1, got {self.r}")
        if self.horizon < 1:
            raise InvalidParameter(f"horizon must be >= 1, got {self.horizon}")
        if inputs.shape[1] != self.r and inputs.shape[0] > 0:
            raise InvalidParameter(
                f"input vectors have {inputs.shape[1]} entries, expected r={self.r}"
            )
        if inputs.shape[0] != targets.shape[0]:
            raise InvalidParameter("inputs and targets must have equal length")
        if inputs.size and not np.all(np.isfinite(inputs)):
            raise InvalidParameter("embedded inputs must be finite")
        if targets.size and not np.all(np.isfinite(targets)):
            raise InvalidParameter("embedded targets must be finite")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    def __len__(self) -> int:
        return self.targets.size


def embed(series: TimeSeries, r: int, horizon: int) -> EmbeddedDataset:
    """Unroll a series into contiguous unit-lag windows with a lookahead target.

    Pair ``j`` couples the window ``values[j : j+r]`` with the target
    ``values[j + r - 1 + horizon]``; ordering is preserved.
    """
    if r < 1 or horizon < 1:
        raise InvalidParameter("r and horizon must be >= 1")
    n = len(series) - r - horizon + 1
    if n < 1:
        raise SeriesTooShort(
            f"need at least {r + horizon} values to embed (r={r}, horizon={horizon}), "
            f"got {len(series)}"
        )
    v = series.values
    idx = np.arange(n)[:, None] + np.arange(r)[None, :]
    inputs = v[idx]
    targets = v[r - 1 + horizon : r - 1 + horizon + n]
    return EmbeddedDataset(inputs, targets, r=r, horizon=horizon)


def split(dataset: EmbeddedDataset, n_train: int) -> tuple[EmbeddedDataset, EmbeddedDataset]:
    """Chronological prefix/suffix split; never shuffles."""
    if not 0 <= n_train <= len(dataset):
        raise IndexOutOfRange(
            f"n_train={n_train} outside [0, {len(dataset)}]"
        )
    head = EmbeddedDataset(
        dataset.inputs[:n_train], dataset.targets[:n_train],
        r=dataset.r, horizon=dataset.horizon,
    )
    tail = EmbeddedDataset(
        dataset.inputs[n_train:], dataset.targets[n_train:],
        r=dataset.r, horizon=dataset.horizon,
    )
    return head, tail


def gen_mackey_glass(n: int, tau: int = 17, x0: float = 1.2, warmup: int = 0) -> TimeSeries:
    """Discrete Mackey-Glass recursion, a standard chaotic forecasting benchmark.

    Iterates ``x[t+1] = x[t] + 0.1 * x[t-tau] / (1 + x[t-tau]**10) - 0.01 * x[t]``
    from the constant history ``x0``. The first emitted sample is one step past
    ``x0``; the first ``warmup`` samples are then discarded. Fully deterministic.
    """
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    if tau < 1:
        raise InvalidParameter(f"tau must be >= 1, got {tau}")
    if not 0.0 < x0 < 2.0:
        raise InvalidParameter(f"x0 must lie in (0, 2), got {x0}")
    if warmup < 0:
        raise InvalidParameter(f"warmup must be >= 0, got {warmup}")

    total = warmup + n
    # x[i] holds the state at time i - tau, so the constant history and the
    # seed value occupy x[0 .. tau].
    x = np.empty(total + tau + 1)
    x[: tau + 1] = x0
    for t in range(total):
        cur = x[tau + t]
        delayed = x[t]
        x[tau + t + 1] = cur + 0.1 * delayed / (1.0 + delayed ** 10) - 0.01 * cur
    return TimeSeries(x[tau + 1 + warmup :], start_time=0, step=1)


def gen_logistic(n: int, r: float = 3.9, x0: float = 0.3) -> TimeSeries:
    """Logistic map ``x[t+1] = r * x[t] * (1 - x[t])``, starting at ``x0``."""
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    if not 0.0 < r <= 4.0:
        raise InvalidParameter(f"r must lie in (0, 4], got {r}")
    if not 0.0 < x0 < 1.0:
        raise InvalidParameter(f"x0 must lie in (0, 1), got {x0}")
    out = np.empty(n)
    cur = x0
    for i in range(n):
        out[i] = cur
        cur = r * cur * (1.0 - cur)
    return TimeSeries(out, start_time=0, step=1)

"""Kernel-weighted nearest-neighbor network with trainable per-rank bandwidths.

A network stores its training pairs and answers a query in four stages:
rank the stored samples by Euclidean distance, evaluate a kernel on the k
smallest distances (one bandwidth per neighbor rank), normalize the kernel
values into weights, and return the weighted sum of the selected neighbors'
targets. The bandwidths are the only learnable parameters; they are fitted
by steepest descent on the leave-one-out squared error, with backtracking
so the loss never ends above where it started.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DegenerateStats,
    DimensionMismatch,
    IndexOutOfRange,
    InvalidParameter,
    NoEligibleSamples,
    TooFewSamples,
    UnsupportedKernel,
)
from .series import EmbeddedDataset

# Lower bound keeping parametric kernels parametric during descent.
BANDWIDTH_FLOOR = 1e-8
_MAX_BACKTRACKS = 30


class KernelKind(enum.Enum):
    """Kernel applied to a neighbor distance scaled by its rank's bandwidth."""

    EXPONENTIAL = "exponential"          # exp(-d * b)
    INVERSE_QUADRATIC = "inverse_quadratic"  # 1 / (1 + (d * b)^2)
    LINEAR_RESCALE = "linear_rescale"    # (max - (d - min)) / max, no parameter

    @property
    def parametric(self) -> bool:
        return self is not KernelKind.LINEAR_RESCALE

    @classmethod
    def from_name(cls, name: str) -> "KernelKind":
        try:
            return cls(name)
        except ValueError:
            raise UnsupportedKernel(f"unknown kernel {name!r}") from None


@dataclass(frozen=True)
class NeighborSet:
    """Indices of the selected training samples and their distances, ascending."""

    indices: np.ndarray
    distances: np.ndarray

    def __len__(self) -> int:
        return self.indices.size


@dataclass(frozen=True)
class AdaptiveNetwork:
    """Memory-based kernel regressor over stored (feature, target) pairs.

    ``k`` is clamped to the stored sample count at construction. ``bandwidths``
    holds one positive value per neighbor rank; it defaults to all ones.
    Instances are immutable, so concurrent forward passes are safe; training
    returns a new network.
    """

    train_inputs: np.ndarray
    train_targets: np.ndarray
    k: int
    kernel: KernelKind = KernelKind.EXPONENTIAL
    bandwidths: np.ndarray | None = None

    def __post_init__(self):
        inputs = np.array(self.train_inputs, dtype=np.float64, copy=True)
        targets = np.array(self.train_targets, dtype=np.float64, copy=True)
        if inputs.ndim != 2 or inputs.shape[0] < 1:
            raise InvalidParameter("train_inputs must be a non-empty (n, d) array")
        if targets.shape != (inputs.shape[0],):
            raise InvalidParameter("train_targets must align with train_inputs")
        if self.k < 1:
            raise InvalidParameter(f"k must be >= 1, got {self.k}")
        k = min(self.k, inputs.shape[0])
        if self.bandwidths is None:
            bw = np.ones(k)
        else:
            bw = np.array(self.bandwidths, dtype=np.float64, copy=True)
            if bw.shape != (k,):
                raise InvalidParameter(f"bandwidths must have length k={k}")
            if self.kernel.parametric and not np.all(bw > 0):
                raise InvalidParameter("bandwidths must be positive")
        for arr in (inputs, targets, bw):
            arr.flags.writeable = False
        object.__setattr__(self, "train_inputs", inputs)
        object.__setattr__(self, "train_targets", targets)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "bandwidths", bw)

    @property
    def n_samples(self) -> int:
        return self.train_inputs.shape[0]

    @property
    def dim(self) -> int:
        return self.train_inputs.shape[1]


def euclidean_distances(query, net: AdaptiveNetwork) -> np.ndarray:
    """Distance from ``query`` to every stored sample, in storage order."""
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (net.dim,):
        raise DimensionMismatch(
            f"query has shape {q.shape}, stored features have dimension {net.dim}"
        )
    diff = net.train_inputs - q
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def select_k_min(distances, k: int, exclude: int | None = None) -> NeighborSet:
    """The k smallest distances with their indices; ties go to the lower index.

    ``k`` larger than the eligible count is clamped, not an error.
    """
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    d = np.asarray(distances, dtype=np.float64)
    order = np.argsort(d, kind="stable")
    if exclude is not None:
        if not 0 <= exclude < d.size:
            raise IndexOutOfRange(f"exclude index {exclude} outside [0, {d.size})")
        order = order[order != exclude]
    if order.size == 0:
        raise NoEligibleSamples("no candidates left after exclusion")
    chosen = order[: min(k, order.size)]
    return NeighborSet(indices=chosen, distances=d[chosen])


def kernel_eval(kind: KernelKind, d_m: float, b_m: float,
                d_stats: tuple[float, float] | None = None) -> float:
    """Evaluate one kernel node.

    ``d_stats`` is the (min, max) of the selected neighbor distances; only the
    linear-rescale kernel uses it, and it raises ``DegenerateStats`` when the
    max is zero (callers fall back to uniform weights).
    """
    if d_m < 0:
        raise InvalidParameter(f"distance must be >= 0, got {d_m}")
    if kind is KernelKind.LINEAR_RESCALE:
        if d_stats is None:
            raise InvalidParameter("linear_rescale needs the neighbor (min, max) distances")
        d_min, d_max = d_stats
        if d_max == 0:
            raise DegenerateStats("all selected distances are zero")
        return (d_max - (d_m - d_min)) / d_max
    if b_m <= 0:
        raise InvalidParameter(f"bandwidth must be positive, got {b_m}")
    if kind is KernelKind.EXPONENTIAL:
        return float(np.exp(-d_m * b_m))
    return float(1.0 / (1.0 + (d_m * b_m) ** 2))


def _raw_weights(kind: KernelKind, dists: np.ndarray, bw: np.ndarray) -> np.ndarray:
    """Vector of first-layer kernel values for ranked distances ``dists``."""
    if kind is KernelKind.LINEAR_RESCALE:
        d_max = dists.max()
        if d_max == 0:
            raise DegenerateStats("all selected distances are zero")
        return (d_max - (dists - dists.min())) / d_max
    scaled = dists * bw
    if kind is KernelKind.EXPONENTIAL:
        return np.exp(-scaled)
    return 1.0 / (1.0 + scaled ** 2)


def forward(net: AdaptiveNetwork, query, exclude: int | None = None) -> tuple[float, NeighborSet]:
    """Predict the target for ``query``; also returns the selected neighbors.

    Kernel values over the k nearest stored samples are normalized to sum to
    one and applied to the neighbors' targets. When the kernel mass vanishes
    (underflow, or the rescale kernel with all-zero distances) the weights
    fall back to uniform.
    """
    d = euclidean_distances(query, net)
    nb = select_k_min(d, net.k, exclude=exclude)
    kk = len(nb)
    try:
        raw = _raw_weights(net.kernel, nb.distances, net.bandwidths[:kk])
        total = raw.sum()
    except DegenerateStats:
        total = 0.0
    if total == 0.0:
        weights = np.full(kk, 1.0 / kk)
    else:
        weights = raw / total
    output = float(weights @ net.train_targets[nb.indices])
    return output, nb


def _check_dataset_matches(net: AdaptiveNetwork, dataset: EmbeddedDataset) -> None:
    if dataset.inputs.shape != net.train_inputs.shape or not (
        np.array_equal(dataset.inputs, net.train_inputs)
        and np.array_equal(dataset.targets, net.train_targets)
    ):
        raise InvalidParameter("dataset must equal the network's stored training data")


def loo_predictions(net: AdaptiveNetwork, dataset: EmbeddedDataset) -> np.ndarray:
    """Prediction for each stored sample with that sample excluded from its
    own neighbor set. Needed so training residuals are not trivially zero."""
    _check_dataset_matches(net, dataset)
    if net.n_samples < 2:
        raise TooFewSamples("leave-one-out needs at least two stored samples")
    out = np.empty(net.n_samples)
    for j in range(net.n_samples):
        out[j], _ = forward(net, net.train_inputs[j], exclude=j)
    return out


@dataclass(frozen=True)
class _LooCache:
    """Per-sample ranked neighbor distances/targets with self excluded.

    Neighbor selection depends only on distances, never on bandwidths, so the
    cache stays valid for the whole descent.
    """

    dists: np.ndarray    # (n, kk) ascending per row
    targets: np.ndarray  # (n, kk) matching neighbor targets
    truth: np.ndarray    # (n,) per-sample training targets


def _build_loo_cache(net: AdaptiveNetwork) -> _LooCache:
    if net.n_samples < 2:
        raise TooFewSamples("leave-one-out needs at least two stored samples")
    n = net.n_samples
    kk = min(net.k, n - 1)
    nd = np.empty((n, kk))
    nt = np.empty((n, kk))
    for j in range(n):
        d = euclidean_distances(net.train_inputs[j], net)
        nb = select_k_min(d, net.k, exclude=j)
        nd[j] = nb.distances
        nt[j] = net.train_targets[nb.indices]
    return _LooCache(dists=nd, targets=nt, truth=net.train_targets)


def _cache_outputs(cache: _LooCache, kind: KernelKind, bw: np.ndarray) -> np.ndarray:
    """Leave-one-out outputs for every sample under bandwidths ``bw``."""
    kk = cache.dists.shape[1]
    if kind is KernelKind.LINEAR_RESCALE:
        d_max = cache.dists.max(axis=1, keepdims=True)
        d_min = cache.dists.min(axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            raw = (d_max - (cache.dists - d_min)) / d_max
        raw[np.repeat(d_max == 0, kk, axis=1)] = 0.0
    else:
        scaled = cache.dists * bw[:kk]
        raw = np.exp(-scaled) if kind is KernelKind.EXPONENTIAL else 1.0 / (1.0 + scaled ** 2)
    total = raw.sum(axis=1)
    fallback = total == 0.0
    safe_total = np.where(fallback, 1.0, total)
    out = (raw * cache.targets).sum(axis=1) / safe_total
    if np.any(fallback):
        out[fallback] = cache.targets[fallback].mean(axis=1)
    return out


def _cache_loss(cache: _LooCache, kind: KernelKind, bw: np.ndarray) -> float:
    resid = _cache_outputs(cache, kind, bw) - cache.truth
    return float(resid @ resid)


def _cache_grad(cache: _LooCache, kind: KernelKind, bw: np.ndarray, k_total: int) -> np.ndarray:
    """Gradient of the leave-one-out squared error with respect to each
    rank's bandwidth.

    Only rank m's kernel value depends on b_m, so with raw values n1, mass
    S = sum(n1) and output y = sum(n1 * t) / S,

        dy/db_m = (dK_m/db_m) * (t_m - y) / S

    and the loss contributions sum over samples. Samples on the uniform
    fallback have constant weights and contribute nothing.
    """
    kk = cache.dists.shape[1]
    scaled = cache.dists * bw[:kk]
    if kind is KernelKind.EXPONENTIAL:
        raw = np.exp(-scaled)
        draw = -cache.dists * raw
    else:
        raw = 1.0 / (1.0 + scaled ** 2)
        draw = -2.0 * cache.dists ** 2 * bw[:kk] * raw ** 2
    total = raw.sum(axis=1)
    live = total > 0.0
    grad = np.zeros(k_total)
    if not np.any(live):
        return grad
    raw = raw[live]
    draw = draw[live]
    total = total[live]
    targets = cache.targets[live]
    y = (raw * targets).sum(axis=1) / total
    resid = y - cache.truth[live]
    contrib = 2.0 * resid[:, None] * draw * (targets - y[:, None]) / total[:, None]
    grad[:kk] = contrib.sum(axis=0)
    return grad


def grad_bandwidths(net: AdaptiveNetwork, dataset: EmbeddedDataset) -> np.ndarray:
    """Analytic gradient of the leave-one-out squared-error loss.

    The linear-rescale kernel has no parameter; its gradient is the zero
    vector and descent is a no-op.
    """
    _check_dataset_matches(net, dataset)
    if not net.kernel.parametric:
        return np.zeros(net.k)
    cache = _build_loo_cache(net)
    return _cache_grad(cache, net.kernel, net.bandwidths, net.k)


def train_bandwidths_sd(
    net: AdaptiveNetwork,
    dataset: EmbeddedDataset,
    lr: float,
    epochs: int,
) -> tuple[AdaptiveNetwork, np.ndarray]:
    """Steepest descent on the leave-one-out loss with per-epoch backtracking.

    Each epoch proposes ``b - lr * grad`` (floored at ``BANDWIDTH_FLOOR``) and
    halves the step until the loss stops increasing; if no step helps, the
    bandwidths stay put for that epoch. Returns the trained network and the
    loss trace (initial loss first, one entry per epoch after)."""
    if lr <= 0:
        raise InvalidParameter(f"lr must be positive, got {lr}")
    if epochs < 0:
        raise InvalidParameter(f"epochs must be >= 0, got {epochs}")
    _check_dataset_matches(net, dataset)
    cache = _build_loo_cache(net)
    b = np.array(net.bandwidths, copy=True)
    loss = _cache_loss(cache, net.kernel, b)
    if not net.kernel.parametric:
        # No learnable parameter: descent is a no-op with a flat trace.
        return net, np.full(epochs + 1, loss)
    trace = [loss]
    for _ in range(epochs):
        g = _cache_grad(cache, net.kernel, b, net.k)
        step = lr
        for _attempt in range(_MAX_BACKTRACKS):
            cand = np.maximum(b - step * g, BANDWIDTH_FLOOR)
            cand_loss = _cache_loss(cache, net.kernel, cand)
            if cand_loss <= loss:
                b, loss = cand, cand_loss
                break
            step *= 0.5
        trace.append(loss)
    trained = replace(net, bandwidths=b)
    return trained, np.asarray(trace)

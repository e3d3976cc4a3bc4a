"""Classic linear amygdala-orbitofrontal learner, kept as a baseline.

Two weight banks see the same stimulus: the amygdala bank V accumulates
associations and never unlearns (its update clamps at zero once its summed
output reaches the reinforcement), while the orbitofrontal bank W tracks the
signed output error and inhibits whatever the amygdala over-predicts. The
model output is the difference of the two summed responses.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, InvalidParameter
from .series import EmbeddedDataset


@dataclass(frozen=True)
class ClassicBelModel:
    """Per-component weights for the excitatory (v) and inhibitory (w) banks."""

    v: np.ndarray
    w: np.ndarray
    alpha: float
    beta: float

    def __post_init__(self):
        v = np.array(self.v, dtype=np.float64, copy=True)
        w = np.array(self.w, dtype=np.float64, copy=True)
        if v.ndim != 1 or v.shape != w.shape:
            raise InvalidParameter("v and w must be 1-D arrays of equal length")
        if not 0.0 < self.alpha <= 1.0 or not 0.0 < self.beta <= 1.0:
            raise InvalidParameter("alpha and beta must lie in (0, 1]")
        v.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)

    @classmethod
    def zeros(cls, dim: int, alpha: float = 0.5, beta: float = 0.5) -> "ClassicBelModel":
        return cls(v=np.zeros(dim), w=np.zeros(dim), alpha=alpha, beta=beta)

    @property
    def dim(self) -> int:
        return self.v.size


def _check_stimulus(model: ClassicBelModel, s) -> np.ndarray:
    arr = np.asarray(s, dtype=np.float64)
    if arr.shape != (model.dim,):
        raise DimensionMismatch(
            f"stimulus has shape {arr.shape}, model expects ({model.dim},)"
        )
    return arr


def bel_forward(model: ClassicBelModel, s) -> tuple[float, np.ndarray, np.ndarray]:
    """Output E = sum(A) - sum(O) with per-node responses A = v*s, O = w*s."""
    arr = _check_stimulus(model, s)
    a = model.v * arr
    o = model.w * arr
    return float(a.sum() - o.sum()), a, o


def bel_update(model: ClassicBelModel, s, rew: float) -> ClassicBelModel:
    """One associative update toward reinforcement ``rew``.

    The amygdala step is alpha * s * max(0, rew - sum(A)); the orbitofrontal
    step is beta * s * (E - rew), which keeps E = rew as the stable fixed
    point. Both use the pre-update responses.
    """
    arr = _check_stimulus(model, s)
    e, a, o = bel_forward(model, arr)
    dv = model.alpha * arr * max(0.0, rew - float(a.sum()))
    dw = model.beta * arr * (e - rew)
    return replace(model, v=model.v + dv, w=model.w + dw)


def bel_train(model: ClassicBelModel, dataset: EmbeddedDataset, epochs: int) -> ClassicBelModel:
    """Sequential updates over the dataset's pairs, repeated ``epochs`` times."""
    if epochs < 0:
        raise InvalidParameter(f"epochs must be >= 0, got {epochs}")
    for _ in range(epochs):
        for s, rew in zip(dataset.inputs, dataset.targets):
            model = bel_update(model, s, float(rew))
    return model


def bel_predict(model: ClassicBelModel, s) -> float:
    """Model output for a stimulus (forward pass, weights frozen)."""
    e, _, _ = bel_forward(model, s)
    return e

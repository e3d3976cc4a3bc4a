"""The full prediction pipeline built from two adaptive networks.

Signal path for a query vector: a thalamic stage appends the window's max and
min to the raw stimulus, the primary (BL) network predicts the target from
that widened feature vector, the secondary (MO) network predicts the primary
network's own error from the raw stimulus, and a fusion stage combines the
two responses linearly. Training is hybrid: steepest descent fits each
network's kernel bandwidths on its leave-one-out loss, then regularized least
squares fits the fusion weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    InvalidParameter,
    LengthMismatch,
    SingularSystem,
    TooFewSamples,
)
from .network import AdaptiveNetwork, KernelKind, forward, loo_predictions, train_bandwidths_sd
from .series import EmbeddedDataset, TimeSeries, embed

# Relative tolerance for verifying an unregularized normal-equation solution;
# beyond it the system counts as numerically singular.
_NORMAL_EQ_TOL = 1e-10


@dataclass(frozen=True)
class ThalamusOutput:
    """Pass-through of the stimulus plus its [max, min] summary."""

    th_agg: np.ndarray
    th_maxmin: np.ndarray


@dataclass(frozen=True)
class CmWeights:
    """Fusion weights (w1, w2, w3) and fixed punishment weights (wa1, wa2, wa3).

    The punishment weights are pinned at (1, -1, 0), making the punishment the
    signed primary-network error r_u - r_a.
    """

    w1: float
    w2: float
    w3: float
    wa1: float = 1.0
    wa2: float = -1.0
    wa3: float = 0.0


@dataclass(frozen=True)
class LoWeights:
    """Secondary punishment weights; fixed at (1, 0) with the per-sample bias
    carrying the negated expected punishment."""

    wo1: float = 1.0
    wo2: float = 0.0


@dataclass(frozen=True)
class BelpmConfig:
    """Training hyperparameters for both networks and the fusion fit."""

    k_a: int = 8
    k_o: int = 8
    bl_kernel: KernelKind = KernelKind.EXPONENTIAL
    mo_kernel: KernelKind = KernelKind.EXPONENTIAL
    lr: float = 0.05
    epochs: int = 50
    ridge: float = 1e-8

    def __post_init__(self):
        if self.k_a < 1 or self.k_o < 1:
            raise InvalidParameter("neighbor counts must be >= 1")
        if self.lr <= 0:
            raise InvalidParameter(f"lr must be positive, got {self.lr}")
        if self.epochs < 0:
            raise InvalidParameter(f"epochs must be >= 0, got {self.epochs}")
        if self.ridge < 0:
            raise InvalidParameter(f"ridge must be >= 0, got {self.ridge}")


@dataclass(frozen=True)
class BelpmModel:
    """Trained artifact: both networks, fusion weights, and the embedding shape."""

    r: int
    horizon: int
    bl: AdaptiveNetwork
    mo: AdaptiveNetwork
    cm: CmWeights
    lo: LoWeights = field(default_factory=LoWeights)
    config: BelpmConfig = field(default_factory=BelpmConfig)

    def __post_init__(self):
        if self.bl.dim != self.r + 2:
            raise InvalidParameter(
                f"primary network expects dimension r+2={self.r + 2}, got {self.bl.dim}"
            )
        if self.mo.dim != self.r:
            raise InvalidParameter(
                f"secondary network expects dimension r={self.r}, got {self.mo.dim}"
            )
        if self.bl.n_samples != self.mo.n_samples:
            raise InvalidParameter("both networks must store the same sample count")


def thalamus(i) -> ThalamusOutput:
    """Max/min summary plus untouched pass-through of the stimulus."""
    arr = np.asarray(i, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise EmptyInput("stimulus must be a non-empty vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter("stimulus must be finite")
    return ThalamusOutput(
        th_agg=arr.copy(),
        th_maxmin=np.array([arr.max(), arr.min()]),
    )


def bl_features(s, th_maxmin) -> np.ndarray:
    """Widened feature vector [s_1..s_R, max, min] for the primary network."""
    s_arr = np.asarray(s, dtype=np.float64)
    mm = np.asarray(th_maxmin, dtype=np.float64)
    if s_arr.ndim != 1 or mm.shape != (2,):
        raise DimensionMismatch("expected a 1-D stimulus and a (max, min) pair")
    return np.concatenate([s_arr, mm])


def _bl_feature_matrix(inputs: np.ndarray) -> np.ndarray:
    return np.column_stack([inputs, inputs.max(axis=1), inputs.min(axis=1)])


def punishments(r_u: float, r_a: float, r_o: float) -> tuple[float, float, float]:
    """Punishment signals for one sample: the primary error, the expected
    punishment forwarded to the secondary path (identical), and the secondary
    path's own error against it."""
    p_a = r_u - r_a
    p_a_e = p_a
    p_o = r_o - p_a_e
    return p_a, p_a_e, p_o


def cm_lse_fit(r_a_list, r_o_list, r_u_list, ridge: float = 1e-8) -> CmWeights:
    """Least-squares fit of the fusion weights over per-sample responses.

    Minimizes sum((w1*r_a + w2*r_o + w3 - r_u)^2) + ridge * |w|^2 through the
    3x3 normal equations. Rank-deficient designs resolve to the minimum-norm
    minimizer; ``SingularSystem`` is raised only when, at ridge=0, even that
    fails to satisfy the normal equations numerically (retry with ridge > 0).
    """
    ra = np.asarray(r_a_list, dtype=np.float64)
    ro = np.asarray(r_o_list, dtype=np.float64)
    ru = np.asarray(r_u_list, dtype=np.float64)
    if not ra.shape == ro.shape == ru.shape or ra.ndim != 1 or ra.size < 1:
        raise LengthMismatch("response sequences must be equal-length and non-empty")
    if ridge < 0:
        raise InvalidParameter(f"ridge must be >= 0, got {ridge}")
    x = np.column_stack([ra, ro, np.ones(ra.size)])
    a = x.T @ x + ridge * np.eye(3)
    b = x.T @ ru
    try:
        w, *_ = np.linalg.lstsq(a, b, rcond=None)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None
    if ridge == 0.0:
        if not np.all(np.isfinite(w)):
            raise SingularSystem("normal equations produced non-finite weights; "
                                 "use ridge > 0")
        scale = max(float(np.abs(a).max() * np.abs(w).max()),
                    float(np.abs(b).max()), 1.0)
        if float(np.abs(a @ w - b).max()) > _NORMAL_EQ_TOL * scale:
            raise SingularSystem("normal equations are numerically singular; "
                                 "use ridge > 0")
    return CmWeights(w1=float(w[0]), w2=float(w[1]), w3=float(w[2]))


def train(train_set: EmbeddedDataset, config: BelpmConfig = BelpmConfig()) -> BelpmModel:
    """Fit the full pipeline on embedded training pairs.

    In order: build the widened features and descend the primary network's
    bandwidths on its leave-one-out loss; take the leave-one-out primary
    responses and their residuals; fit the secondary network to those
    residuals (independent descent); then least-squares fit the fusion
    weights over the two networks' leave-one-out responses. Deterministic
    for fixed data and config.
    """
    if len(train_set) < 2:
        raise TooFewSamples("training needs at least two embedded pairs")
    feats = _bl_feature_matrix(train_set.inputs)
    bl_data = EmbeddedDataset(feats, train_set.targets,
                              r=feats.shape[1], horizon=train_set.horizon)
    bl = AdaptiveNetwork(feats, train_set.targets, k=config.k_a, kernel=config.bl_kernel)
    bl, _ = train_bandwidths_sd(bl, bl_data, lr=config.lr, epochs=config.epochs)

    r_a = loo_predictions(bl, bl_data)
    residuals = train_set.targets - r_a

    mo_data = EmbeddedDataset(train_set.inputs, residuals,
                              r=train_set.r, horizon=train_set.horizon)
    mo = AdaptiveNetwork(train_set.inputs, residuals, k=config.k_o, kernel=config.mo_kernel)
    mo, _ = train_bandwidths_sd(mo, mo_data, lr=config.lr, epochs=config.epochs)

    r_o = loo_predictions(mo, mo_data)
    cm = cm_lse_fit(r_a, r_o, train_set.targets, ridge=config.ridge)
    return BelpmModel(r=train_set.r, horizon=train_set.horizon,
                      bl=bl, mo=mo, cm=cm, lo=LoWeights(), config=config)


def predict(model: BelpmModel, i) -> float:
    """Fused prediction w1 * r_a + w2 * r_o + w3 for one query vector."""
    arr = np.asarray(i, dtype=np.float64)
    if arr.shape != (model.r,):
        raise DimensionMismatch(
            f"query has shape {arr.shape}, model expects ({model.r},)"
        )
    th = thalamus(arr)
    r_a, _ = forward(model.bl, bl_features(th.th_agg, th.th_maxmin))
    r_o, _ = forward(model.mo, arr)
    return model.cm.w1 * r_a + model.cm.w2 * r_o + model.cm.w3


def predict_series(model: BelpmModel, series: TimeSeries, mode: str = "direct") -> TimeSeries:
    """One prediction per embeddable window of ``series``.

    Only the direct multi-step strategy is supported: the lookahead is baked
    into the model's embedding, one model per horizon. The output series
    starts at the epoch of the first predictable target, so it aligns
    index-for-index with the observed values it forecasts.
    """
    if mode != "direct":
        raise InvalidParameter(f"unsupported prediction mode {mode!r}")
    dataset = embed(series, model.r, model.horizon)
    preds = np.array([predict(model, x) for x in dataset.inputs])
    start = series.start_time + (model.r - 1 + model.horizon) * series.step
    return TimeSeries(preds, start_time=start, step=series.step)

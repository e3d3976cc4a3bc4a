"""Experiment configuration and the end-to-end train/predict/evaluate driver.

A run loads or generates a series, embeds and splits it chronologically,
trains the chosen model, predicts the held-out suffix, and reports metrics
plus a peak-identification summary. Nothing here (or anywhere else in the
package) draws random numbers, so a config maps to byte-identical artifacts
on every run.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dataclass_fields
from pathlib import Path

import numpy as np

from .baselines import WknnModel, wknn_predict
from .classic import ClassicBelModel, bel_predict, bel_train
from .errors import ConfigError
from .metrics import EvaluationReport, PeakReport, correlation, find_peaks, match_peaks, mse, nmse
from .model import BelpmConfig, predict as belpm_predict, train as belpm_train
from .network import KernelKind
from .series import EmbeddedDataset, TimeSeries, embed, gen_logistic, gen_mackey_glass, split
from .storage import SeriesFile, _fmt, load_series_csv

MODEL_KINDS = ("belpm", "wknn", "classic_bel")
GENERATORS = ("mackey_glass", "logistic")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; exactly one of ``data_path``/``generator``."""

    # data source
    data_path: str | None = None
    missing_sentinel: float | None = None
    gap_policy: str = "error"
    generator: str | None = None
    gen_n: int = 600
    gen_tau: int = 17
    gen_x0: float | None = None    # per-generator default: 1.2 / 0.3
    gen_warmup: int = 100
    gen_rate: float = 3.9          # logistic map growth rate
    # embedding and split
    embed_r: int = 3
    horizon: int = 1
    n_train: int = 500
    # model selection and hyperparameters
    model: str = "belpm"
    k_a: int = 8
    k_o: int = 8
    bl_kernel: str = "exponential"
    mo_kernel: str = "exponential"
    lr: float = 0.05
    epochs: int = 50
    ridge: float = 1e-8
    wknn_k: int = 2
    bel_alpha: float = 0.1
    bel_beta: float = 0.1
    bel_epochs: int = 10
    # evaluation
    peak_window: int = 2
    peak_top_m: int | None = None
    # artifacts (written when set)
    out_dir: str | None = None

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclass_fields(cls))

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        unknown = set(mapping) - set(cls.field_names())
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**mapping)


def _resolve_series(config: ExperimentConfig) -> TimeSeries:
    if (config.data_path is None) == (config.generator is None):
        raise ConfigError("exactly one of data_path / generator must be set")
    if config.data_path is not None:
        if not Path(config.data_path).exists():
            raise ConfigError(f"data file not found: {config.data_path}")
        return load_series_csv(SeriesFile(
            path=config.data_path,
            missing_sentinel=config.missing_sentinel,
            gap_policy=config.gap_policy,
        ))
    if config.generator == "mackey_glass":
        x0 = 1.2 if config.gen_x0 is None else config.gen_x0
        return gen_mackey_glass(config.gen_n, tau=config.gen_tau,
                                x0=x0, warmup=config.gen_warmup)
    if config.generator == "logistic":
        x0 = 0.3 if config.gen_x0 is None else config.gen_x0
        return gen_logistic(config.gen_n, r=config.gen_rate, x0=x0)
    raise ConfigError(f"unknown generator {config.generator!r}")


def train_model(config: ExperimentConfig, train_set: EmbeddedDataset):
    """Train the configured model kind on the given pairs."""
    if config.model == "belpm":
        return belpm_train(train_set, BelpmConfig(
            k_a=config.k_a,
            k_o=config.k_o,
            bl_kernel=KernelKind.from_name(config.bl_kernel),
            mo_kernel=KernelKind.from_name(config.mo_kernel),
            lr=config.lr,
            epochs=config.epochs,
            ridge=config.ridge,
        ))
    if config.model == "wknn":
        return WknnModel.from_dataset(train_set, k=config.wknn_k)
    if config.model == "classic_bel":
        base = ClassicBelModel.zeros(train_set.r, alpha=config.bel_alpha,
                                     beta=config.bel_beta)
        return bel_train(base, train_set, epochs=config.bel_epochs)
    raise ConfigError(f"unknown model kind {config.model!r}")


def predict_with(model, inputs: np.ndarray) -> np.ndarray:
    """One prediction per input row, dispatched on the model type."""
    from .model import BelpmModel  # local import to avoid cycle in type dispatch

    if isinstance(model, BelpmModel):
        fn = lambda x: belpm_predict(model, x)
    elif isinstance(model, WknnModel):
        fn = lambda x: wknn_predict(model, x)
    elif isinstance(model, ClassicBelModel):
        fn = lambda x: bel_predict(model, x)
    else:
        raise ConfigError(f"cannot predict with {type(model).__name__}")
    return np.array([fn(x) for x in inputs])


def _peak_summary(config: ExperimentConfig, observed: TimeSeries,
                  predicted: TimeSeries) -> PeakReport | None:
    if len(observed) < 3:
        return None
    obs_peaks = find_peaks(observed, top_m=config.peak_top_m)
    return match_peaks(obs_peaks, predicted,
                       window=config.peak_window, top_m=config.peak_top_m)


def render_report(report: EvaluationReport) -> str:
    """Structured ``key = value`` text mirroring the report fields."""
    lines = [
        f"n = {report.n}",
        f"nmse = {_fmt(report.nmse)}",
        f"mse = {_fmt(report.mse)}",
        f"correlation = {_fmt(report.correlation)}",
    ]
    pk = report.peak_report
    if pk is not None:
        lines += [
            f"peak_window = {pk.window}",
            f"peak_identified_exact = {pk.identified_exact}",
            f"peak_identified_delayed = {pk.identified_delayed}",
            f"peak_missed = {pk.missed}",
        ]
    return "\n".join(lines) + "\n"


def render_peak_report(pk: PeakReport, observed_peaks: np.ndarray) -> str:
    offsets = ",".join("miss" if off is None else str(off) for off in pk.offsets)
    lines = [
        f"window = {pk.window}",
        f"observed_peaks = {','.join(str(int(t)) for t in observed_peaks)}",
        f"offsets = {offsets}",
        f"identified_exact = {pk.identified_exact}",
        f"identified_delayed = {pk.identified_delayed}",
        f"missed = {pk.missed}",
    ]
    return "\n".join(lines) + "\n"


def run_experiment(config: ExperimentConfig) -> EvaluationReport:
    """Run the full pipeline; write artifacts when ``out_dir`` is set.

    Artifacts: ``predictions.csv`` (time,observed,predicted rows),
    ``report.txt`` (the rendered report), and ``peaks.txt`` when the test
    span is long enough to carry peaks.
    """
    series = _resolve_series(config)
    dataset = embed(series, config.embed_r, config.horizon)
    train_set, test_set = split(dataset, config.n_train)
    if len(test_set) == 0:
        raise ConfigError("n_train leaves no test samples")
    model = train_model(config, train_set)
    preds = predict_with(model, test_set.inputs)

    # Epoch of the first test target: offset past the embedding head plus the
    # training prefix.
    first_target = config.embed_r - 1 + config.horizon + config.n_train
    start = series.start_time + first_target * series.step
    observed_ts = TimeSeries(test_set.targets, start_time=start, step=series.step)
    predicted_ts = TimeSeries(preds, start_time=start, step=series.step)

    peak_report = _peak_summary(config, observed_ts, predicted_ts)
    report = EvaluationReport(
        nmse=nmse(test_set.targets, preds),
        mse=mse(test_set.targets, preds),
        correlation=correlation(test_set.targets, preds),
        n=len(test_set),
        peak_report=peak_report,
    )

    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        rows = ["time,observed,predicted"]
        for j in range(len(test_set)):
            rows.append(
                f"{observed_ts.time_at(j)},{_fmt(test_set.targets[j])},{_fmt(preds[j])}"
            )
        (out / "predictions.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
        (out / "report.txt").write_text(render_report(report), encoding="utf-8")
        if peak_report is not None:
            obs_peaks = find_peaks(observed_ts, top_m=config.peak_top_m)
            (out / "peaks.txt").write_text(
                render_peak_report(peak_report, obs_peaks), encoding="utf-8"
            )
    return report


def run_bench(configs: list[ExperimentConfig]) -> list[tuple[str, EvaluationReport]]:
    """Run several experiment configs in order; label each by its model kind."""
    results = []
    for i, cfg in enumerate(configs):
        report = run_experiment(cfg)
        results.append((f"{i}:{cfg.model}", report))
    return results

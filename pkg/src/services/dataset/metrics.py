"""Per-channel regression metrics for C_1 .. C_7 and their CSV exports."""

from __future__ import annotations

import warnings
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from ...core.errors import MetricsLengthError
from ...models.metrics import ChannelMetrics, MetricsReport


def _nan_summary(values: np.ndarray) -> tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return float(np.nanmean(values)), float(np.nanstd(values))


def pearson(predicted: np.ndarray, actual: np.ndarray) -> float:
    """Pearson correlation, NaN when either series is constant"""
    if np.ptp(predicted) == 0.0 or np.ptp(actual) == 0.0:
        return float("nan")
    return float(stats.pearsonr(predicted, actual).statistic)


def compute_metrics(predicted, actual, channel_offset: int = 1) -> MetricsReport:
    """
    predicted, actual: (N, 7) forces on C_1 .. C_7 (N).

    RMS% is the RMSE over the range of the actual values of that channel.
    """
    predicted = np.asarray(predicted, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if predicted.ndim == 1:
        predicted = predicted[:, None]
    if actual.ndim == 1:
        actual = actual[:, None]
    if predicted.shape != actual.shape:
        raise MetricsLengthError(f"predicted {predicted.shape} and actual {actual.shape} differ")
    if predicted.shape[0] < 2:
        raise MetricsLengthError("at least two samples are required")

    channels = []
    for c in range(actual.shape[1]):
        p, a = predicted[:, c], actual[:, c]
        rmse = float(np.sqrt(np.mean((p - a) ** 2)))
        span = float(np.ptp(a))
        rms_pct = 100.0 * rmse / span if span > 0 else float("nan")
        channels.append(ChannelMetrics(channel=f"C{c + channel_offset}", rmse=rmse, rms_pct=rms_pct, corr=pearson(p, a)))

    rmse_mean, rmse_sd = _nan_summary(np.array([m.rmse for m in channels]))
    pct_mean, pct_sd = _nan_summary(np.array([m.rms_pct for m in channels]))
    corr_mean, corr_sd = _nan_summary(np.array([m.corr for m in channels]))
    return MetricsReport(
        channels=channels,
        rmse_mean=rmse_mean,
        rmse_sd=rmse_sd,
        rms_pct_mean=pct_mean,
        rms_pct_sd=pct_sd,
        corr_mean=corr_mean,
        corr_sd=corr_sd,
    )


def mean_corr(report: MetricsReport, channels: Sequence[str]) -> float:
    values = np.array([m.corr for m in report.channels if m.channel in channels])
    return _nan_summary(values)[0]


def metrics_frame(reports: Mapping[str, MetricsReport]) -> pd.DataFrame:
    """One row per (variant, channel) plus 'mean' and 'sd' aggregate rows per variant"""
    rows = []
    for variant, report in reports.items():
        for m in report.channels:
            rows.append({"variant": variant, **m.model_dump()})
        rows.append(
            {"variant": variant, "channel": "mean", "rmse": report.rmse_mean, "rms_pct": report.rms_pct_mean, "corr": report.corr_mean}
        )
        rows.append(
            {"variant": variant, "channel": "sd", "rmse": report.rmse_sd, "rms_pct": report.rms_pct_sd, "corr": report.corr_sd}
        )
    return pd.DataFrame(rows, columns=["variant", "channel", "rmse", "rms_pct", "corr"])


def write_metrics_csv(reports: Mapping[str, MetricsReport], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    metrics_frame(reports).to_csv(path, index=False, float_format="%.10g")
    return path


def write_predictions_csv(
    variant_predictions: Mapping[str, np.ndarray],
    actual: np.ndarray,
    frame_ids: Sequence[str],
    path: str | Path,
) -> Path:
    """Long-format per-frame export: variant, frame_id, channel, predicted, actual"""
    frames = []
    n_frames, n_channels = actual.shape
    channel_names = [f"C{c + 1}" for c in range(n_channels)]
    for variant, predicted in variant_predictions.items():
        frames.append(
            pd.DataFrame(
                {
                    "variant": variant,
                    "frame_id": np.repeat(np.asarray(frame_ids), n_channels),
                    "channel": np.tile(channel_names, n_frames),
                    "predicted": np.asarray(predicted).reshape(-1),
                    "actual": actual.reshape(-1),
                }
            )
        )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.concat(frames, ignore_index=True).to_csv(path, index=False, float_format="%.10g")
    return path

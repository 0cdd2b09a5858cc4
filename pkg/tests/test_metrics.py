"""
Unit tests for per-channel regression metrics.
"""

import math

import numpy as np
import pandas as pd
import pytest

from src.core.errors import MetricsLengthError
from src.services.dataset.metrics import (
    compute_metrics,
    mean_corr,
    metrics_frame,
    write_metrics_csv,
    write_predictions_csv,
)


class TestComputeMetrics:
    """Tests for compute_metrics"""

    def test_perfect_prediction(self, rng):
        """Zero error and unit correlation"""
        actual = rng.uniform(0.0, 2.0, size=(20, 7))
        report = compute_metrics(actual.copy(), actual)
        assert report.rmse_mean == 0.0
        assert report.rms_pct_mean == 0.0
        assert report.corr_mean == pytest.approx(1.0)
        assert [m.channel for m in report.channels] == [f"C{i}" for i in range(1, 8)]

    def test_known_offset(self):
        """A constant +1 offset over a range of 3 gives 33.3%"""
        actual = np.array([0.0, 1.0, 2.0, 3.0])
        report = compute_metrics(actual + 1.0, actual)
        channel = report.channels[0]
        assert channel.rmse == pytest.approx(1.0)
        assert channel.rms_pct == pytest.approx(100.0 / 3.0)
        assert channel.corr == pytest.approx(1.0)

    def test_constant_channel_has_undefined_correlation(self):
        """A channel that never changes reports NaN corr and RMS%"""
        actual = np.column_stack([np.zeros(5), np.arange(5.0)])
        predicted = actual + 0.1
        report = compute_metrics(predicted, actual)
        assert math.isnan(report.channels[0].corr)
        assert math.isnan(report.channels[0].rms_pct)
        assert report.corr_mean == pytest.approx(1.0)

    def test_length_mismatch(self):
        """Different shapes are refused"""
        with pytest.raises(MetricsLengthError):
            compute_metrics(np.zeros((4, 7)), np.zeros((5, 7)))

    def test_single_sample(self):
        """One frame is not enough"""
        with pytest.raises(MetricsLengthError):
            compute_metrics(np.zeros((1, 7)), np.zeros((1, 7)))

    def test_mean_corr_over_subset(self, rng):
        """mean_corr averages the named channels only"""
        actual = rng.uniform(size=(30, 7))
        predicted = actual.copy()
        predicted[:, 0] = rng.uniform(size=30)
        report = compute_metrics(predicted, actual)
        assert mean_corr(report, ["C2", "C3"]) == pytest.approx(1.0)
        assert mean_corr(report, ["C1"]) < 1.0


class TestExports:
    """Tests for the CSV exports"""

    def test_metrics_frame_rows(self, rng):
        """7 channel rows plus mean and sd per variant"""
        actual = rng.uniform(size=(10, 7))
        reports = {name: compute_metrics(actual + 0.01 * i, actual) for i, name in enumerate("abcdef")}
        frame = metrics_frame(reports)
        assert len(frame) == 54
        assert list(frame.columns) == ["variant", "channel", "rmse", "rms_pct", "corr"]
        assert frame[frame.channel == "mean"].variant.tolist() == list("abcdef")

    def test_metrics_csv(self, rng, tmp_path):
        """write_metrics_csv round-trips through pandas"""
        actual = rng.uniform(size=(10, 7))
        path = write_metrics_csv({"clean": compute_metrics(actual, actual)}, tmp_path / "out" / "metrics.csv")
        assert len(pd.read_csv(path)) == 9

    def test_predictions_csv(self, tmp_path):
        """One row per variant, frame and channel"""
        actual = np.arange(14.0).reshape(2, 7)
        path = write_predictions_csv(
            {"clean": actual, "noise-low": actual + 1.0}, actual, ["f0", "f1"], tmp_path / "predictions.csv"
        )
        frame = pd.read_csv(path)
        assert len(frame) == 28
        row = frame[(frame.variant == "noise-low") & (frame.frame_id == "f1") & (frame.channel == "C3")].iloc[0]
        assert row.actual == 9.0
        assert row.predicted == 10.0

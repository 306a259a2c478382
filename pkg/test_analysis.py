"""
Tests for response metrics and plots.
"""

import numpy as np
import pandas as pd
import pytest

from slabforge.analysis import plot_time_series, print_metrics, response_metrics
from slabforge.mesh_io import TIME_SERIES_COLUMNS


def test_sine_metrics():
    t = np.linspace(0.0, 10.0, 2001)
    metrics = response_metrics(t, 0.7 * np.sin(2.0 * np.pi * 0.5 * t) + 0.1)
    assert metrics.max_amplitude == pytest.approx(0.8, rel=1e-4)
    assert metrics.dominant_frequency == pytest.approx(0.5, rel=1e-3)
    assert metrics.n_peaks == 5


def test_monotone_signal_has_no_frequency():
    t = np.linspace(0.0, 1.0, 11)
    metrics = response_metrics(t, -2.0 * t)
    assert metrics.dominant_frequency == 0.0
    assert metrics.n_peaks == 0
    assert metrics.max_amplitude == 2.0
    assert response_metrics(np.array([]), np.array([])).to_dict() == {
        "max_amplitude": 0.0, "dominant_frequency": 0.0, "n_peaks": 0,
    }


def test_invalid_samples():
    with pytest.raises(ValueError):
        response_metrics(np.array([0.0, 1.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        response_metrics(np.array([0.0, 0.0]), np.array([1.0, 2.0]))


def test_plot_time_series(tmp_path):
    t = np.linspace(0.1, 2.0, 20)
    frame = pd.DataFrame(
        {
            "t": t, "d": np.sin(t), "ddot": np.cos(t), "theta": t, "thetadot": np.ones_like(t),
            "Fy": np.zeros_like(t), "M": np.ones_like(t), "outer_iters": 2, "swapped": (t > 1.0).astype(int),
        },
        columns=TIME_SERIES_COLUMNS,
    )
    path = plot_time_series(frame, tmp_path / "plots" / "response.png")
    assert path.exists()
    assert path.stat().st_size > 0


def test_print_metrics(capsys):
    t = np.linspace(0.0, 4.0, 401)
    print_metrics({"d": response_metrics(t, np.sin(2.0 * np.pi * t))}, "Rigid-body response")
    out = capsys.readouterr().out
    assert "Rigid-body response metrics" in out
    assert "peaks = 4" in out

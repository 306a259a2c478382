"""
Response analysis for recorded rigid-body time series.

Reports the quantities compared across the galloping scenarios: the maximum
amplitude and the dominant frequency of the displacement and rotation.
"""

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Optional, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from scipy.signal import find_peaks  # noqa: E402


@dataclass(frozen=True)
class ResponseMetrics:
    max_amplitude: float
    dominant_frequency: float
    n_peaks: int

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def response_metrics(times: np.ndarray, values: np.ndarray) -> ResponseMetrics:
    """
    Maximum amplitude and dominant frequency of a response.

    The amplitude is the largest absolute value. The frequency is the inverse
    of the mean spacing between successive maxima of the signal about its
    mean; it is 0.0 when fewer than two maxima are found.

    Args:
        times: Strictly increasing sample times.
        values: Samples, same length as ``times``.

    Returns:
        ResponseMetrics with amplitude, frequency in Hz and the peak count.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1:
        raise ValueError(f"times and values must be 1-D of equal length, got {times.shape}, {values.shape}")
    if len(times) and np.any(np.diff(times) <= 0.0):
        raise ValueError("sample times must increase strictly")
    if not len(values):
        return ResponseMetrics(0.0, 0.0, 0)
    amplitude = float(np.max(np.abs(values)))
    peaks, _ = find_peaks(values - values.mean())
    if len(peaks) < 2:
        return ResponseMetrics(amplitude, 0.0, int(len(peaks)))
    period = float(np.mean(np.diff(times[peaks])))
    return ResponseMetrics(amplitude, 1.0 / period, int(len(peaks)))


def print_metrics(metrics: Dict[str, ResponseMetrics], title: str = "Response") -> None:
    print("\n" + "=" * 70)
    print(f"{title} metrics")
    print("=" * 70)
    for name, m in metrics.items():
        print(f"   {name:<10} max |.| = {m.max_amplitude:.6g}   f = {m.dominant_frequency:.6g} Hz   peaks = {m.n_peaks}")
    print("=" * 70 + "\n")


def plot_time_series(source: Union[str, Path, pd.DataFrame], save_path: Optional[Union[str, Path]] = None):
    """
    Displacement, angle and load panels of a simulation time series.

    Args:
        source: ``timeseries.csv`` path or its DataFrame.
        save_path: Path to save the figure (optional).

    Returns:
        ``save_path`` when given, else the figure.
    """
    frame = source if isinstance(source, pd.DataFrame) else pd.read_csv(source)
    fig, axes = plt.subplots(3, 1, figsize=(10, 9), sharex=True)
    axes[0].plot(frame["t"], frame["d"], color="tab:blue", lw=1.5)
    axes[0].set_ylabel("d")
    axes[1].plot(frame["t"], frame["theta"], color="tab:orange", lw=1.5)
    axes[1].set_ylabel("theta [rad]")
    axes[2].plot(frame["t"], frame["Fy"], label="F_y", lw=1.2)
    axes[2].plot(frame["t"], frame["M"], label="M", lw=1.2)
    axes[2].set_ylabel("load")
    axes[2].set_xlabel("t")
    axes[2].legend(loc="best")
    for ax in axes:
        ax.grid(alpha=0.3)
    swaps = frame.loc[frame["swapped"] == 1, "t"]
    for t in swaps:
        axes[1].axvline(t, color="gray", lw=0.3, alpha=0.5)
    fig.suptitle("Rigid-body response", fontsize=14, fontweight="bold")
    fig.tight_layout()
    if save_path is None:
        return fig
    save_path = Path(save_path)
    save_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(save_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return save_path

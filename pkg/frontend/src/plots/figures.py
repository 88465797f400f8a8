"""Paper-style figures from simulation trace CSVs, rendered headless.

Two figures are produced: estimation vs truth time series per state
component, and the error / Lyapunov evolution. Measurement instants are
marked with vertical lines, red for GNSS and orange for the magnetometer,
taken from the trace's event column (never recomputed from rates). Each
figure is written as a vector + raster pair next to the requested path.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .frames import GNSS_EVENT, MAG_EVENT, TraceFrame, load_trace

GNSS_COLOR = "tab:red"
MAG_COLOR = "tab:orange"
LOG_FLOOR = 1e-16


@dataclass(frozen=True)
class PlotResult:
    gnss_markers: int
    mag_markers: int
    outputs: tuple[Path, ...]


def _mark_events(ax, frame: TraceFrame) -> tuple[int, int]:
    gnss = frame.event_times(GNSS_EVENT)
    mag = frame.event_times(MAG_EVENT)
    for t in gnss:
        ax.axvline(t, color=GNSS_COLOR, alpha=0.35, linewidth=0.8)
    for t in mag:
        ax.axvline(t, color=MAG_COLOR, alpha=0.35, linewidth=0.8)
    return len(gnss), len(mag)


def _pair_paths(out_path: str | Path) -> tuple[Path, Path]:
    out = Path(out_path)
    if out.suffix.lower() == ".png":
        return out, out.with_suffix(".svg")
    if out.suffix.lower() in (".svg", ".pdf"):
        return out, out.with_suffix(".png")
    return out.with_suffix(".png"), out.with_suffix(".svg")


def _save_pair(fig, out_path: str | Path) -> tuple[Path, ...]:
    paths = _pair_paths(out_path)
    for p in paths:
        fig.savefig(p, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return paths


def plot_estimation(csv_path: str | Path, out_path: str | Path) -> PlotResult:
    """Truth vs estimate per state component, event instants marked."""
    frame = load_trace(csv_path)
    names = frame.state_names
    ncols = 3 if len(names) >= 3 else len(names)
    nrows = int(np.ceil(len(names) / ncols))
    fig, axes = plt.subplots(nrows, ncols, figsize=(3.2 * ncols, 2.2 * nrows),
                             sharex=True, squeeze=False)
    gnss = mag = 0
    for k, name in enumerate(names):
        ax = axes[k // ncols][k % ncols]
        ax.plot(frame.t, frame.columns[f"truth_{name}"], "k-", linewidth=1.2, label="truth")
        ax.plot(frame.t, frame.columns[f"est_{name}"], "b--", linewidth=1.0, label="estimate")
        gnss, mag = _mark_events(ax, frame)
        ax.set_ylabel(name)
    for k in range(len(names), nrows * ncols):
        axes[k // ncols][k % ncols].set_axis_off()
    for ax in axes[-1]:
        ax.set_xlabel("time (s)")
    axes[0][0].legend(loc="best", fontsize=8)
    fig.suptitle("State estimation vs truth")
    fig.tight_layout()
    return PlotResult(gnss, mag, _save_pair(fig, out_path))


def plot_errors(csv_path: str | Path, out_path: str | Path) -> PlotResult:
    """Attitude error, velocity error, and Lyapunov value (log scale)."""
    frame = load_trace(csv_path)
    fig, axes = plt.subplots(3, 1, figsize=(6.0, 6.5), sharex=True)
    gnss = mag = 0

    axes[0].plot(frame.t, frame.columns["attitude_error_rad"], "k-", linewidth=1.1)
    axes[0].set_ylabel("attitude error (rad)")
    axes[1].plot(frame.t, frame.columns["velocity_error"], "k-", linewidth=1.1)
    axes[1].set_ylabel("velocity error")
    lyap = np.maximum(frame.columns["lyapunov"], LOG_FLOOR)  # log-scale floor
    axes[2].plot(frame.t, lyap, "k-", linewidth=1.1)
    axes[2].set_yscale("log")
    axes[2].set_ylabel("Lyapunov value")
    axes[2].set_xlabel("time (s)")
    for ax in axes:
        gnss, mag = _mark_events(ax, frame)
    fig.suptitle("Estimation error and Lyapunov value")
    fig.tight_layout()
    return PlotResult(gnss, mag, _save_pair(fig, out_path))

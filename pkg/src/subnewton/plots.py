"""Figure rendering for experiment reports.

Renders the benchmark's standard views to files next to the trace CSVs:
cumulative-time vs objective / test accuracy (log-scale time axis, as in
the comparison tables) and the per-method learning-rate sensitivity
plot.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_time_curves(curves, out_path, value="objective", ylabel=None, logx=True):
    """One line per run: cumulative seconds against a trace column.

    curves is a list of (label, records); the t = 0 starting row is
    dropped so the log-scale time axis stays well defined.
    """
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, records in curves:
        t = np.array([r.cum_seconds for r in records[1:]])
        y = np.array([getattr(r, value) for r in records[1:]])
        keep = np.isfinite(y) & (t > 0)
        if keep.any():
            ax.plot(t[keep], y[keep], label=label, linewidth=1.2)
    if logx:
        ax.set_xscale("log")
    if value == "objective":
        ax.set_yscale("log")
    ax.set_xlabel("cumulative seconds")
    ax.set_ylabel(ylabel or value)
    ax.grid(True, which="both", alpha=0.3)
    if curves:
        ax.legend(fontsize=7, loc="best")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_sensitivity(method, entries, out_path):
    """Objective per epoch for every learning rate of a sweep.

    entries is a list of (learning_rate, classification, records);
    diverged runs end where the guard fired.
    """
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for lr, classification, records in entries:
        epochs = np.array([r.iteration for r in records])
        obj = np.array([r.objective for r in records])
        keep = np.isfinite(obj) & (obj > 0)
        ax.plot(
            epochs[keep],
            obj[keep],
            label=f"lr={lr:.2e} ({classification})",
            linewidth=1.0,
        )
    ax.set_yscale("log")
    ax.set_xlabel("epoch")
    ax.set_ylabel("training objective")
    ax.set_title(f"step-size sensitivity: {method}")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=6, loc="best", ncol=2)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path

"""Figure rendering for decompositions and benchmark reports.

Uses the Agg backend so figures render to files in headless runs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .tucker import TuckerModel

_MODE_NAMES_4 = ("channel", "sample", "frequency bin", "repetition")


def plot_tucker_factors(model: TuckerModel, path, sample_rate: float | None = None,
                        frequencies=None) -> Path:
    """One panel per mode, each factor column drawn as a component curve.

    sample_rate, when given, turns the sample mode's x axis into seconds;
    frequencies, when given, labels the frequency mode's x axis in Hz.
    """
    n_modes = len(model.factors)
    fig, axes = plt.subplots(1, n_modes, figsize=(3.4 * n_modes, 3.0))
    if n_modes == 1:
        axes = [axes]
    for mode, (ax, factor) in enumerate(zip(axes, model.factors)):
        name = _MODE_NAMES_4[mode] if n_modes == 4 else f"mode {mode}"
        x = np.arange(factor.shape[0])
        xlabel = name
        if n_modes == 4 and mode == 1 and sample_rate:
            x = x / sample_rate
            xlabel = "time (s)"
        if n_modes == 4 and mode == 2 and frequencies is not None:
            x = np.asarray(frequencies)
            xlabel = "frequency (Hz)"
        discrete = factor.shape[0] <= 32
        for j in range(factor.shape[1]):
            style = "o-" if discrete else "-"
            ax.plot(x, factor[:, j], style, label=f"component {j + 1}", markersize=3)
        ax.set_xlabel(xlabel)
        ax.set_title(f"{name} factor")
        if mode == 0:
            ax.set_ylabel("loading")
            ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_error_rates(report, path) -> Path:
    """Grouped bar chart of average error rates per DoF and method."""
    dofs = report.dofs()
    methods = report.methods()
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    width = 0.8 / max(len(methods), 1)
    offsets = np.arange(len(dofs), dtype=np.float64)
    for m_idx, method in enumerate(methods):
        rates = [100.0 * report.average(method, dof) for dof in dofs]
        centres = offsets + (m_idx - (len(methods) - 1) / 2.0) * width
        bars = ax.bar(centres, rates, width=width * 0.9, label=method)
        ax.bar_label(bars, fmt="%.2f%%", fontsize=8)
    ax.set_xticks(offsets)
    ax.set_xticklabels([f"DoF{d}" for d in dofs])
    ax.set_ylabel("error rate (%)")
    n = len(report.subjects())
    ax.set_title(f"Average classification error across {n} subject{'s' if n != 1 else ''}")
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path

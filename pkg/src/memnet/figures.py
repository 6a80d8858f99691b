"""Figure rendering for the CLI report paths (file output only).

The core library never imports this module; it pulls in matplotlib with the
Agg backend so commands work headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def save_benchmark_overlay(items, path):
    """Per-frequency panels of drive voltage, element voltage, and
    resistance for the series benchmark. items: [(frequency, trace), ...]"""
    fig, axes = plt.subplots(
        len(items), 1, figsize=(8.0, 2.6 * len(items)), squeeze=False
    )
    for ax, (freq, trace) in zip(axes[:, 0], items):
        t = trace.times
        ax.plot(t, trace.node_voltages[:, 0], label="drive [V]", color="tab:gray", lw=1.0)
        ax.plot(t, trace.link_voltages[:, 1], label="element voltage [V]", color="tab:blue", lw=1.0)
        ax2 = ax.twinx()
        ax2.plot(t, trace.resistances[:, 1], label="resistance", color="tab:red", lw=1.2, ls="--")
        ax2.set_ylabel("R [ohm]", color="tab:red")
        ax.set_ylabel("V [V]")
        ax.set_title(f"{freq:g} Hz", fontsize=10)
        ax.legend(loc="upper right", fontsize=8)
    axes[-1, 0].set_xlabel("t [s]")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_benchmark_loops(items, path):
    """Current against element voltage for each frequency (pinched loops)."""
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    for freq, trace in items:
        ax.plot(
            trace.link_voltages[:, 1],
            1e3 * trace.currents[:, 1],
            lw=0.9,
            label=f"{freq:g} Hz",
        )
    ax.axhline(0.0, color="0.8", lw=0.6)
    ax.axvline(0.0, color="0.8", lw=0.6)
    ax.set_xlabel("element voltage [V]")
    ax.set_ylabel("current [mA]")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_network_panels(trace, external_ids, internal_ids, path):
    """Stacked panels: driven-node voltages, internal voltages, resistances."""
    fig, axes = plt.subplots(3, 1, figsize=(8.0, 8.0), sharex=True)
    t = trace.times
    for nid in external_ids:
        axes[0].plot(t, trace.voltage_of(nid), lw=1.0, label=f"node {nid}")
    axes[0].set_ylabel("drive [V]")
    if external_ids:
        axes[0].legend(fontsize=8, ncol=min(len(external_ids), 4))
    for nid in internal_ids:
        axes[1].plot(t, trace.voltage_of(nid), lw=0.6, alpha=0.7)
    axes[1].set_ylabel("internal [V]")
    axes[2].plot(t, trace.resistances, lw=0.6, alpha=0.7)
    axes[2].set_ylabel("R [ohm]")
    axes[2].set_xlabel("t [s]")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_spectrum_panels(panels, path):
    """Magnitude spectra of outputs against their fitted mimics.

    panels: [(title, output Spectrum, fit Spectrum), ...]; only the lower
    half-spectrum is drawn, the mirror carries no extra information.
    """
    fig, axes = plt.subplots(
        len(panels), 1, figsize=(7.0, 2.4 * len(panels)), squeeze=False
    )
    for ax, (title, out_spec, fit_spec) in zip(axes[:, 0], panels):
        half = out_spec.n // 2 + 1
        omega = out_spec.omegas[:half]
        ax.plot(omega, np.abs(out_spec.bins[:half]), lw=1.0, label="output")
        ax.plot(
            omega,
            np.abs(fit_spec.bins[:half]),
            lw=0.9,
            ls="--",
            label="fit",
            color="tab:orange",
        )
        ax.set_ylabel("|bin|")
        ax.set_title(title, fontsize=9)
        ax.legend(fontsize=8)
    axes[-1, 0].set_xlabel("omega [rad/s]")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_memristance_series(trace, link_positions, labels, path):
    """Time series of selected link resistances (0-based positions)."""
    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    for pos, label in zip(link_positions, labels):
        ax.plot(trace.times, trace.resistances[:, pos], lw=1.0, label=label)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("R [ohm]")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_readout_scores(result, path):
    """Episode scores colored by true label, split by train/test marker."""
    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    episodes = np.arange(len(result.scores))
    for subset, marker in (("train", "o"), ("test", "s")):
        for label, color in ((1, "tab:blue"), (-1, "tab:orange")):
            mask = np.array(
                [s == subset and l == label for s, l in zip(result.subsets, result.labels)]
            )
            if mask.any():
                name = "square" if label == 1 else "sawtooth"
                ax.scatter(
                    episodes[mask],
                    result.scores[mask],
                    c=color,
                    marker=marker,
                    s=22,
                    label=f"{name} ({subset})",
                )
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.set_xlabel("episode")
    ax.set_ylabel("readout score")
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)

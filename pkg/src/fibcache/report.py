"""Render the run's measurement series to figure files.

Companion to the CSV output: one figure for windowed miss ratios, one for
cache occupancy over the run. Uses the Agg backend so rendering works
headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_miss_ratio_figure(windows, path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 4))
    if windows:
        x = [w.window_index for w in windows]
        ax.plot(x, [w.tcam_miss_ratio for w in windows], marker="o", markersize=3, label="TCAM miss ratio")
        ax.plot(x, [w.sram_miss_ratio for w in windows], marker="s", markersize=3, label="SRAM miss ratio")
        ax.legend()
    ax.set_xlabel("window")
    ax.set_ylabel("miss ratio")
    ax.set_title("Cache miss ratios per window")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_occupancy_figure(samples, path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 4))
    if samples:
        x = [s.packet_count for s in samples]
        ax.plot(x, [s.tcam_entries for s in samples], label="TCAM entries")
        ax.plot(x, [s.sram_entries for s in samples], label="SRAM entries")
        ax.plot(x, [s.generated_total for s in samples], linestyle="--", label="generated total")
        ax.legend()
    ax.set_xlabel("packets processed")
    ax.set_ylabel("entries")
    ax.set_title("Cache occupancy")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_all(sink, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [
        render_miss_ratio_figure(sink.windows, out_dir / "miss_ratios.png"),
        render_occupancy_figure(sink.occupancy, out_dir / "occupancy.png"),
    ]

"""Windowed miss-ratio and occupancy measurement with CSV emission.

A TCAM miss is any packet not served by the TCAM; an SRAM miss is any
packet served by neither cache (full-table forward or drop). Ratios are
fractions of all packets in the window, not of previously-missed packets.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path


class EmptyWindow(RuntimeError):
    """close_window called with no packets recorded since the last close."""


@dataclass(frozen=True, slots=True)
class WindowStat:
    window_index: int
    packets_in_window: int
    tcam_misses: int
    sram_misses: int

    @property
    def tcam_miss_ratio(self) -> float:
        return self.tcam_misses / self.packets_in_window

    @property
    def sram_miss_ratio(self) -> float:
        return self.sram_misses / self.packets_in_window


@dataclass(frozen=True, slots=True)
class OccupancySample:
    packet_count: int
    tcam_entries: int
    sram_entries: int
    generated_total: int


MISS_CSV_HEADER = "window,packets,tcam_misses,sram_misses,tcam_miss_ratio,sram_miss_ratio"
OCCUPANCY_CSV_HEADER = "packet_count,tcam_entries,sram_entries,generated_total"


class StatsSink:
    """Accumulates per-packet outcomes into windows and totals."""

    def __init__(self):
        self.windows: list[WindowStat] = []
        self.occupancy: list[OccupancySample] = []
        self.window_packets = 0
        self.window_tcam_misses = 0
        self.window_sram_misses = 0
        self.total_packets = 0
        self.total_tcam_misses = 0
        self.total_sram_misses = 0

    def record(self, outcome) -> None:
        self.window_packets += 1
        self.total_packets += 1
        served = outcome.served_by
        if served.value != "tcam":
            self.window_tcam_misses += 1
            self.total_tcam_misses += 1
            if served.value != "sram":
                self.window_sram_misses += 1
                self.total_sram_misses += 1

    def close_window(self) -> WindowStat:
        if self.window_packets == 0:
            raise EmptyWindow("no packets recorded in the current window")
        stat = WindowStat(
            window_index=len(self.windows) + 1,
            packets_in_window=self.window_packets,
            tcam_misses=self.window_tcam_misses,
            sram_misses=self.window_sram_misses,
        )
        self.windows.append(stat)
        self.window_packets = 0
        self.window_tcam_misses = 0
        self.window_sram_misses = 0
        return stat

    def sample_occupancy(self, snapshot) -> None:
        self.occupancy.append(
            OccupancySample(
                packet_count=snapshot.packet_count,
                tcam_entries=snapshot.tcam_occupancy,
                sram_entries=snapshot.sram_occupancy,
                generated_total=snapshot.trie.generated_total,
            )
        )

    def write_csv(self, out_dir) -> tuple[Path, Path]:
        """Write miss_ratios.csv and occupancy.csv; returns both paths."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        miss_path = out_dir / "miss_ratios.csv"
        with miss_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(MISS_CSV_HEADER.split(","))
            for w in self.windows:
                writer.writerow(
                    [
                        w.window_index,
                        w.packets_in_window,
                        w.tcam_misses,
                        w.sram_misses,
                        f"{w.tcam_miss_ratio:.6f}",
                        f"{w.sram_miss_ratio:.6f}",
                    ]
                )
        occ_path = out_dir / "occupancy.csv"
        with occ_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(OCCUPANCY_CSV_HEADER.split(","))
            for s in self.occupancy:
                writer.writerow([s.packet_count, s.tcam_entries, s.sram_entries, s.generated_total])
        return miss_path, occ_path

    def summary(self) -> dict:
        total = self.total_packets
        last = self.occupancy[-1] if self.occupancy else None
        return {
            "total_packets": total,
            "overall_tcam_miss_ratio": self.total_tcam_misses / total if total else 0.0,
            "overall_sram_miss_ratio": self.total_sram_misses / total if total else 0.0,
            "final_occupancies": {
                "tcam": last.tcam_entries if last else 0,
                "sram": last.sram_entries if last else 0,
            },
        }

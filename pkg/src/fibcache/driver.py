"""Replay orchestration: feed a trace (with optional interleaved route
updates) through an engine, and optionally validate every packet against
the linear-scan reference table."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import Engine, FibUpdate, Insert, PacketRecord, ServedBy
from .oracle import LinearScanFib

# Full state scans are expensive; run them at update boundaries and every
# this many packets. Per-packet checking stays on the engine's cheap
# touched-prefix path, which together with install-time overlap rejection
# covers the same invariants inductively.
FULL_CHECK_INTERVAL = 100_000


@dataclass
class ReplayResult:
    packets: int = 0
    dropped: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def replay(engine: Engine, packets, updates=None, on_outcome=None) -> ReplayResult:
    """Drive packets through the engine, applying sidecar updates whose
    sequence number is due before each packet."""
    result = ReplayResult()
    pending = sorted(updates, key=lambda item: item[0]) if updates else []
    next_update = 0
    full_check = engine.check_invariants
    for pkt in packets:
        while next_update < len(pending) and pending[next_update][0] <= pkt.seq:
            engine.apply_fib_update(pending[next_update][1])
            next_update += 1
        outcome = engine.process_packet(pkt)
        result.packets += 1
        if outcome.next_hop is None:
            result.dropped += 1
        if on_outcome is not None:
            on_outcome(pkt, outcome)
        if full_check and pkt.seq % FULL_CHECK_INTERVAL == 0:
            result.violations.extend(engine.verify_state())
    if full_check:
        result.violations.extend(engine.verify_state())
    engine.finalize()
    return result


def validate(engine: Engine, destinations, updates=None) -> ReplayResult:
    """Replay with per-packet comparison against the linear-scan table.

    Destinations must be indexable (an address array), because the
    reference next hops are computed in vectorized batches per segment
    between updates. Stops on the first mismatch.
    """
    dsts = np.ascontiguousarray(destinations, dtype=np.uint64)
    mirror = LinearScanFib(engine.trie.iter_routes())
    pending = sorted(updates, key=lambda item: item[0]) if updates else []
    result = ReplayResult()

    segments = _segments(len(dsts), pending)
    seq = 0
    for start, stop, seg_updates in segments:
        for update in seg_updates:
            engine.apply_fib_update(update)
            _apply_to_mirror(mirror, update)
            violations = engine.verify_state()
            if violations:
                result.violations.append(f"after update at packet {start + 1}: {violations[0]}")
                return result
        expect_nh, expect_ok = mirror.lookup_batch(dsts[start:stop])
        for i in range(start, stop):
            seq += 1
            outcome = engine.process_packet(PacketRecord(seq, int(dsts[i])))
            result.packets += 1
            if outcome.next_hop is None:
                result.dropped += 1
                if expect_ok[i - start]:
                    result.violations.append(
                        f"packet {seq}: dropped but reference says next hop {expect_nh[i - start]}"
                    )
                    return result
            elif not expect_ok[i - start]:
                result.violations.append(f"packet {seq}: forwarded but reference says no route")
                return result
            elif outcome.next_hop != expect_nh[i - start]:
                result.violations.append(
                    f"packet {seq}: next hop {outcome.next_hop} != reference {expect_nh[i - start]}"
                    + f" (served by {outcome.served_by.value})"
                )
                return result
    result.violations.extend(engine.verify_state())
    engine.finalize()
    return result


def _segments(n_packets: int, pending):
    """Split [0, n) into runs, each carrying the updates due at its start.

    An update with sequence number s applies before the packet with that
    seq, i.e. at 0-based boundary s - 1. Updates addressed past the end of
    the trace never apply.
    """
    boundaries: dict[int, list[FibUpdate]] = {}
    for seq, update in pending:
        b = max(seq - 1, 0)
        if b < n_packets:
            boundaries.setdefault(b, []).append(update)
    cuts = sorted(boundaries)
    segments = []
    start = 0
    for b in cuts:
        if b > start:
            segments.append((start, b, []))
        start = b
    segments.append((start, n_packets, []))
    runs = []
    for seg_start, seg_stop, _ in segments:
        runs.append((seg_start, seg_stop, boundaries.get(seg_start, [])))
    return runs


def _apply_to_mirror(mirror: LinearScanFib, update: FibUpdate) -> None:
    if isinstance(update, Insert):
        mirror.insert(update.prefix, update.next_hop)
    else:
        mirror.withdraw(update.prefix)

"""Packet pipeline wiring the two cache tiers to the full table.

Per-packet decision procedure:

1. TCAM lookup. A hit forwards immediately.
2. On TCAM miss the lookup context is cloned: the SRAM cache and the full
   table both process the packet, reconciled through the table's residency
   flags.
   a. SRAM hit whose prefix is flagged SRAM-resident: SRAM forwards, the
      full-table copy terminates, and the entry becomes a promotion
      candidate.
   b. SRAM miss: the full table forwards by LPM, then generates the
      disjoint cacheable prefix for the destination and installs it into
      SRAM (evicting the lightest SRAM hitter when full).
   c. No covering route at all: the packet is dropped.
3. Promotion after 2a: when the TCAM has room, or the SRAM entry's counter
   exceeds the lightest TCAM counter by more than the configured margin,
   the entry moves to TCAM and the displaced TCAM victim (if any) is
   demoted back into SRAM.
4. Counters age (halve) every ``aging_epoch`` packets; the stats window
   closes every ``stats_window`` packets.

Residency flags in the table mirror tier contents at every packet
boundary; updates from the route feed conservatively purge any generated
prefix overlapping the changed route.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .cache import CacheTier
from .prefix import IpPrefix, NextHop
from .stats import StatsSink
from .trie import CacheRoute, FibTrie, RouteLocation, TrieStats


class SequenceGap(RuntimeError):
    """Packet sequence numbers skipped: the trace is corrupt."""


class InvariantViolation(RuntimeError):
    """An engine invariant failed while invariant checking was enabled."""


class ServedBy(enum.Enum):
    TCAM = "tcam"
    SRAM = "sram"
    DRAM = "dram"
    NONE = "none"


@dataclass(frozen=True, slots=True)
class PipelineConfig:
    tcam_capacity: int = 10_000
    sram_capacity: int = 20_000
    victim_set_size: int = 8
    promotion_margin: int = 0
    aging_epoch: int = 1_000_000
    stats_window: int = 100_000

    def __post_init__(self) -> None:
        for name in ("tcam_capacity", "sram_capacity", "victim_set_size", "aging_epoch", "stats_window"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.promotion_margin < 0:
            raise ValueError("promotion_margin must be >= 0")


@dataclass(frozen=True, slots=True)
class PacketRecord:
    seq: int
    dst: int


@dataclass(frozen=True, slots=True)
class ForwardingOutcome:
    next_hop: NextHop | None          # None means dropped
    served_by: ServedBy
    installed: CacheRoute | None = None
    promoted: IpPrefix | None = None
    evictions: tuple = ()             # (tier name, IpPrefix) pairs


@dataclass(frozen=True, slots=True)
class EngineSnapshot:
    packet_count: int
    tcam_occupancy: int
    sram_occupancy: int
    trie: TrieStats


@dataclass(frozen=True, slots=True)
class Insert:
    prefix: IpPrefix
    next_hop: NextHop


@dataclass(frozen=True, slots=True)
class Withdraw:
    prefix: IpPrefix


FibUpdate = Insert | Withdraw


class Engine:
    """Sequential three-tier forwarding engine over one trie and two tiers."""

    def __init__(self, fib: FibTrie, config: PipelineConfig | None = None, check_invariants: bool = False):
        self.config = config or PipelineConfig()
        self.trie = fib
        self.tcam = CacheTier("tcam", self.config.tcam_capacity)
        self.sram = CacheTier("sram", self.config.sram_capacity)
        self.sink = StatsSink()
        self.packet_count = 0
        self.check_invariants = check_invariants

    # -- setup ----------------------------------------------------------------

    def warm_start(self, destinations) -> None:
        """Pre-populate the SRAM tier with the cacheable prefixes of the
        given destinations (the TCAM fills later, through promotion)."""
        for dst in destinations:
            route = self.trie.generate_cacheable(dst)
            if route is None:
                continue
            if self.trie.get_location(route.prefix) is not RouteLocation.UNCACHED:
                continue
            evicted = self.sram.install(route, self.packet_count)
            self.trie.set_location(route.prefix, RouteLocation.IN_SRAM)
            if evicted is not None:
                self.trie.set_location(evicted.prefix, RouteLocation.UNCACHED)

    # -- the per-packet workflow ------------------------------------------------

    def process_packet(self, pkt: PacketRecord) -> ForwardingOutcome:
        expected = self.packet_count + 1
        if pkt.seq != expected:
            raise SequenceGap(f"expected seq {expected}, got {pkt.seq}")
        self.packet_count = expected
        dst = pkt.dst

        entry = self.tcam.lookup_entry(dst)
        if entry is not None:
            outcome = ForwardingOutcome(entry.route.next_hop, ServedBy.TCAM)
        else:
            outcome = self._tcam_miss(dst)

        self.sink.record(outcome)
        if expected % self.config.stats_window == 0:
            self.sink.close_window()
            self.sink.sample_occupancy(self.snapshot())
        if expected % self.config.aging_epoch == 0:
            self.tcam.age()
            self.sram.age()
        if self.check_invariants:
            self._verify_outcome(outcome)
        return outcome

    def _tcam_miss(self, dst: int) -> ForwardingOutcome:
        # Header clone: SRAM and the full table both evaluate the packet.
        entry = self.sram.lookup_entry(dst)
        if entry is not None and self.trie.get_location(entry.route.prefix) is RouteLocation.IN_SRAM:
            # Flags agree: SRAM forwards, the cloned copy terminates in DRAM.
            return self._maybe_promote(entry)
        match = self.trie.lpm(dst)
        if match is None:
            return ForwardingOutcome(None, ServedBy.NONE)
        route = self.trie.generate_cacheable(dst)
        evictions = ()
        evicted = self.sram.install(route, self.packet_count)
        self.trie.set_location(route.prefix, RouteLocation.IN_SRAM)
        if evicted is not None:
            self.trie.set_location(evicted.prefix, RouteLocation.UNCACHED)
            evictions = (("sram", evicted.prefix),)
        return ForwardingOutcome(match[1], ServedBy.DRAM, installed=route, evictions=evictions)

    def _maybe_promote(self, entry) -> ForwardingOutcome:
        nh = entry.route.next_hop
        if self.tcam.occupancy() >= self.tcam.capacity:
            lightest = self.tcam.peek_lightest()
            if entry.hits <= lightest.hits + self.config.promotion_margin:
                return ForwardingOutcome(nh, ServedBy.SRAM)
        prefix = entry.route.prefix
        evictions = []
        self.sram.remove(prefix)
        demoted = self.tcam.install(entry.route, self.packet_count)
        self.trie.set_location(prefix, RouteLocation.IN_TCAM)
        if demoted is not None:
            evictions.append(("tcam", demoted.prefix))
            bumped = self.sram.install(demoted, self.packet_count)
            self.trie.set_location(demoted.prefix, RouteLocation.IN_SRAM)
            if bumped is not None:
                self.trie.set_location(bumped.prefix, RouteLocation.UNCACHED)
                evictions.append(("sram", bumped.prefix))
        return ForwardingOutcome(nh, ServedBy.SRAM, promoted=prefix, evictions=tuple(evictions))

    # -- control-plane updates -----------------------------------------------

    def apply_fib_update(self, update: FibUpdate) -> list[tuple[str, IpPrefix]]:
        """Apply a route insert/withdraw; returns cache purges as (tier, prefix)."""
        if isinstance(update, Insert):
            invalidated = self.trie.insert_route(update.prefix, update.next_hop)
        else:
            invalidated = self.trie.withdraw_route(update.prefix)
        purged = []
        for prefix in invalidated:
            if self.tcam.remove(prefix):
                purged.append(("tcam", prefix))
            elif self.sram.remove(prefix):
                purged.append(("sram", prefix))
        if self.check_invariants:
            violations = self.verify_state()
            if violations:
                raise InvariantViolation(f"after update {update}: {violations[0]}")
        return purged

    # -- observation ---------------------------------------------------------

    def snapshot(self) -> EngineSnapshot:
        return EngineSnapshot(
            packet_count=self.packet_count,
            tcam_occupancy=self.tcam.occupancy(),
            sram_occupancy=self.sram.occupancy(),
            trie=self.trie.stats(),
        )

    def finalize(self) -> None:
        """Close the trailing partial stats window, if any."""
        if self.sink.window_packets:
            self.sink.close_window()
            self.sink.sample_occupancy(self.snapshot())

    # -- invariant checking ----------------------------------------------------

    def _verify_outcome(self, outcome: ForwardingOutcome) -> None:
        """Cheap per-packet checks over everything this packet touched."""
        problems = []
        if self.tcam.occupancy() > self.tcam.capacity:
            problems.append("tcam over capacity")
        if self.sram.occupancy() > self.sram.capacity:
            problems.append("sram over capacity")
        if (outcome.next_hop is None) != (outcome.served_by is ServedBy.NONE):
            problems.append("drop/served_by mismatch")
        touched = []
        if outcome.installed is not None:
            touched.append(outcome.installed.prefix)
        if outcome.promoted is not None:
            touched.append(outcome.promoted)
        touched.extend(prefix for _, prefix in outcome.evictions)
        for prefix in touched:
            problems.extend(self._check_residency(prefix))
        if problems:
            raise InvariantViolation(f"packet {self.packet_count}: {problems[0]}")

    def _check_residency(self, prefix: IpPrefix) -> list[str]:
        loc = self.trie.get_location(prefix)
        in_tcam = prefix in self.tcam
        in_sram = prefix in self.sram
        if in_tcam and in_sram:
            return [f"{prefix} resident in both tiers"]
        expected = RouteLocation.IN_TCAM if in_tcam else RouteLocation.IN_SRAM if in_sram else RouteLocation.UNCACHED
        if loc is not expected:
            return [f"{prefix} flagged {loc.value} but resident {expected.value}"]
        return []

    def verify_state(self) -> list[str]:
        """Full scan of tier exclusivity, flag consistency, capacity bounds
        and pairwise disjointness. Returns violations, empty when clean."""
        problems = []
        if self.tcam.occupancy() > self.tcam.capacity:
            problems.append("tcam over capacity")
        if self.sram.occupancy() > self.sram.capacity:
            problems.append("sram over capacity")
        tcam_prefixes = {e.route.prefix for e in self.tcam.entries()}
        sram_prefixes = {e.route.prefix for e in self.sram.entries()}
        for prefix in tcam_prefixes & sram_prefixes:
            problems.append(f"{prefix} resident in both tiers")
        flagged = {prefix: loc for prefix, _, loc in self.trie.iter_generated()}
        for prefix, loc in flagged.items():
            resident = (
                RouteLocation.IN_TCAM if prefix in tcam_prefixes
                else RouteLocation.IN_SRAM if prefix in sram_prefixes
                else RouteLocation.UNCACHED
            )
            if loc is not resident:
                problems.append(f"{prefix} flagged {loc.value} but resident {resident.value}")
        for prefixes, name in ((tcam_prefixes, "tcam"), (sram_prefixes, "sram")):
            for prefix in prefixes:
                if prefix not in flagged:
                    problems.append(f"{name} holds unknown prefix {prefix}")
            problems.extend(_disjointness_violations(prefixes, name))
        problems.extend(self.trie.check_structure())
        return problems


def _disjointness_violations(prefixes, name: str) -> list[str]:
    """Prefix intervals nest or are disjoint, so after sorting by base
    address any overlap shows up against the widest open interval."""
    problems = []
    open_end = -1
    open_prefix = None
    for prefix in sorted(prefixes, key=lambda p: (p.address, p.length)):
        if prefix.address <= open_end:
            problems.append(f"{name}: {open_prefix} overlaps {prefix}")
        end = prefix.address + (1 << (32 - prefix.length)) - 1
        if end > open_end:
            open_end = end
            open_prefix = prefix
    return problems

"""Capacity-bounded cache tier holding pairwise-disjoint prefixes.

One instance models the TCAM, another the SRAM. Entries carry traffic
counters; victim selection is exact lightest-hitter with deterministic
tie-breaking (fewest hits, then oldest insertion, then smallest prefix
address). Counter aging halves every counter so "lightest" tracks recent
traffic rather than all-time totals.

Disjointness makes two shortcuts valid: any address is contained by at
most one entry, and no two entries share a base address, so the base
address alone identifies an entry.
"""

from __future__ import annotations

import heapq

from .prefix import ADDR_BITS, MASKS, IpPrefix
from .trie import CacheRoute


class OverlapViolation(RuntimeError):
    """Install would properly overlap an existing entry: an engine bug."""


class CacheEntry:
    __slots__ = ("route", "hits", "inserted_at")

    def __init__(self, route: CacheRoute, inserted_at: int):
        self.route = route
        self.hits = 0
        self.inserted_at = inserted_at

    def sort_key(self):
        return (self.hits, self.inserted_at, self.route.prefix.address)


class CacheTier:
    """One cache memory: bounded, disjoint, with lightest-hitter eviction."""

    def __init__(self, name: str, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.name = name
        self.capacity = capacity
        self._entries: dict[int, CacheEntry] = {}
        # Per-length buckets keyed by masked address; rebuilt into a flat
        # probe list because lookup iterates it for every packet.
        self._by_length: dict[int, dict[int, CacheEntry]] = {}
        self._probe: tuple[tuple[int, dict[int, CacheEntry]], ...] = ()
        # Count of entries under every ancestor prefix, for overlap checks.
        # Keyed by (length << 32) | masked address.
        self._under: dict[int, int] = {}
        # Lazy min-heap of (hits, inserted_at, address); stored hits may lag
        # the entry's real counter (hits only grow between rebuilds), so a
        # popped record is refreshed and reinserted until it is current.
        self._heap: list[tuple[int, int, int]] = []
        self._clock = 0

    # -- queries ------------------------------------------------------------

    def occupancy(self) -> int:
        return len(self._entries)

    def __contains__(self, prefix: IpPrefix) -> bool:
        entry = self._entries.get(prefix.address)
        return entry is not None and entry.route.prefix == prefix

    def entries(self):
        return self._entries.values()

    def lookup_entry(self, addr: int):
        """Hit path: find the unique entry containing addr and count the hit."""
        for mask, bucket in self._probe:
            entry = bucket.get(addr & mask)
            if entry is not None:
                entry.hits += 1
                return entry
        return None

    def lookup(self, addr: int):
        """CacheRoute containing addr (its hit counter incremented), or None."""
        entry = self.lookup_entry(addr)
        return entry.route if entry is not None else None

    # -- mutation -----------------------------------------------------------

    def install(self, route: CacheRoute, now: int | None = None):
        """Insert a route; evicts the lightest hitter first when full.

        Returns the evicted CacheRoute or None. Equal-prefix installs
        replace the next hop and restart the entry (hits 0, fresh age).
        Raises OverlapViolation when the route properly overlaps a
        different entry.
        """
        self._clock += 1
        if now is None:
            now = self._clock
        prefix = route.prefix
        existing = self._entries.get(prefix.address)
        if existing is not None and existing.route.prefix == prefix:
            self._discard(existing)
            evicted = None
        else:
            self._check_disjoint(prefix)
            evicted = None
            if len(self._entries) >= self.capacity:
                evicted = self._evict_lightest()
        entry = CacheEntry(route, now)
        self._entries[prefix.address] = entry
        bucket = self._by_length.get(prefix.length)
        if bucket is None:
            bucket = self._by_length[prefix.length] = {}
            self._rebuild_probe()
        bucket[prefix.address] = entry
        for length in range(prefix.length + 1):
            key = (length << ADDR_BITS) | (prefix.address & MASKS[length])
            self._under[key] = self._under.get(key, 0) + 1
        heapq.heappush(self._heap, (0, now, prefix.address))
        return evicted

    def remove(self, prefix: IpPrefix) -> bool:
        """Drop the entry with exactly this prefix; False if absent."""
        entry = self._entries.get(prefix.address)
        if entry is None or entry.route.prefix != prefix:
            return False
        self._discard(entry)
        return True

    def age(self) -> None:
        """Halve every hit counter (epoch decay) and rebuild the heap."""
        heap = []
        for addr, entry in self._entries.items():
            entry.hits >>= 1
            heap.append((entry.hits, entry.inserted_at, addr))
        heapq.heapify(heap)
        self._heap = heap

    # -- victim selection -----------------------------------------------------

    def peek_lightest(self):
        """The entry next in line for eviction, without removing it."""
        entry = self._settle_top()
        return entry

    def select_victims(self, k: int) -> list[CacheRoute]:
        """The k lightest entries, ascending by (hits, age, address)."""
        if k < 1:
            raise ValueError("k must be >= 1")
        taken: list[tuple[int, int, int]] = []
        routes: list[CacheRoute] = []
        while len(routes) < k:
            entry = self._settle_top()
            if entry is None:
                break
            record = heapq.heappop(self._heap)
            taken.append(record)
            routes.append(entry.route)
        for record in taken:
            heapq.heappush(self._heap, record)
        return routes

    # -- internals -------------------------------------------------------------

    def _settle_top(self):
        """Drop stale heap records and refresh lagging ones until the top is live."""
        heap = self._heap
        entries = self._entries
        while heap:
            hits, inserted_at, addr = heap[0]
            entry = entries.get(addr)
            if entry is None or entry.inserted_at != inserted_at:
                heapq.heappop(heap)
                continue
            if entry.hits != hits:
                heapq.heapreplace(heap, (entry.hits, inserted_at, addr))
                continue
            return entry
        return None

    def _evict_lightest(self) -> CacheRoute:
        entry = self._settle_top()
        assert entry is not None, "eviction from an empty tier"
        heapq.heappop(self._heap)
        self._discard(entry)
        return entry.route

    def _discard(self, entry: CacheEntry) -> None:
        prefix = entry.route.prefix
        del self._entries[prefix.address]
        bucket = self._by_length[prefix.length]
        del bucket[prefix.address]
        if not bucket:
            del self._by_length[prefix.length]
            self._rebuild_probe()
        for length in range(prefix.length + 1):
            key = (length << ADDR_BITS) | (prefix.address & MASKS[length])
            left = self._under[key] - 1
            if left:
                self._under[key] = left
            else:
                del self._under[key]

    def _check_disjoint(self, prefix: IpPrefix) -> None:
        for length, bucket in self._by_length.items():
            if length < prefix.length and (prefix.address & MASKS[length]) in bucket:
                raise OverlapViolation(f"{self.name}: existing /{length} entry covers {prefix}")
        key = (prefix.length << ADDR_BITS) | prefix.address
        if self._under.get(key, 0):
            raise OverlapViolation(f"{self.name}: {prefix} covers an existing entry")

    def _rebuild_probe(self) -> None:
        self._probe = tuple((MASKS[length], bucket) for length, bucket in sorted(self._by_length.items(), reverse=True))

"""Ingestion of route tables, packet traces and update feeds, plus
deterministic synthetic workload generation.

File formats (ASCII, LF lines):

* route table:   ``<prefix> <next_hop_id>``, ``#`` comments and blanks ignored
* packet trace:  one dotted-quad destination per line
* update sidecar: ``<seq> I <prefix> <next_hop>`` or ``<seq> W <prefix>``,
  applied immediately before the packet with that sequence number
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .engine import FibUpdate, Insert, PacketRecord, Withdraw
from .prefix import IpPrefix, NextHop, format_addr, parse_addr, parse_prefix
from .trie import FibTrie


class ParseError(ValueError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class InvalidSpec(ValueError):
    """Zipf generator parameters out of range."""


RibEntry = tuple[IpPrefix, NextHop]


def load_rib(source) -> list[RibEntry]:
    """Parse a route table file or open stream, order preserved."""
    routes: list[RibEntry] = []
    for line_no, raw in _lines(source):
        fields = raw.split()
        if len(fields) != 2:
            raise ParseError(line_no, f"expected '<prefix> <next_hop>', got {raw!r}")
        try:
            prefix = parse_prefix(fields[0])
        except ValueError as exc:
            raise ParseError(line_no, str(exc)) from exc
        try:
            nh = int(fields[1])
        except ValueError as exc:
            raise ParseError(line_no, f"bad next hop {fields[1]!r}") from exc
        routes.append((prefix, nh))
    return routes


def dump_rib(routes: Iterable[RibEntry], path) -> None:
    with Path(path).open("w") as fh:
        for prefix, nh in routes:
            fh.write(f"{prefix} {nh}\n")


def load_trace(source, limit: int | None = None) -> Iterator[PacketRecord]:
    """Yield PacketRecords with seq 1..N from a destinations file."""
    seq = 0
    for line_no, raw in _lines(source, skip_comments=False):
        if limit is not None and seq >= limit:
            return
        try:
            dst = parse_addr(raw.strip())
        except ValueError as exc:
            raise ParseError(line_no, str(exc)) from exc
        seq += 1
        yield PacketRecord(seq, dst)


def dump_trace(destinations: Iterable[int], path) -> None:
    with Path(path).open("w") as fh:
        for dst in destinations:
            fh.write(format_addr(int(dst)) + "\n")


def parse_update(text: str) -> FibUpdate:
    """Parse one bare update: ``I <prefix> <next_hop>`` or ``W <prefix>``."""
    fields = text.split()
    if fields and fields[0] == "I" and len(fields) == 3:
        return Insert(parse_prefix(fields[1]), int(fields[2]))
    if fields and fields[0] == "W" and len(fields) == 2:
        return Withdraw(parse_prefix(fields[1]))
    raise ValueError(f"bad update {text!r}")


def load_updates(source) -> list[tuple[int, FibUpdate]]:
    """Parse an update sidecar; returns (seq, update) sorted by seq (stable)."""
    updates: list[tuple[int, FibUpdate]] = []
    for line_no, raw in _lines(source):
        seq_part, _, rest = raw.partition(" ")
        try:
            seq = int(seq_part)
            update = parse_update(rest)
        except ValueError as exc:
            raise ParseError(line_no, str(exc)) from exc
        updates.append((seq, update))
    updates.sort(key=lambda item: item[0])
    return updates


def _lines(source, skip_comments: bool = True):
    """(line_no, stripped) pairs from a path or open text stream."""
    if hasattr(source, "read"):
        stream = source
        close = False
    else:
        stream = Path(source).open()
        close = True
    try:
        for line_no, raw in enumerate(stream, start=1):
            line = raw.strip()
            if not line:
                continue
            if skip_comments and line.startswith("#"):
                continue
            yield line_no, line
    finally:
        if close:
            stream.close()


# -- synthetic workloads -------------------------------------------------------


@dataclass(frozen=True)
class ZipfSpec:
    """Rank-frequency workload: rank r drawn with probability r^-s / H.

    Ranks map onto a seeded permutation of the route table, or onto an
    explicit destination list when ``population`` is given.
    """

    n_packets: int
    s: float = 1.0
    seed: int = 0
    population: Sequence[int] | None = None

    def __post_init__(self):
        if self.n_packets < 1:
            raise InvalidSpec("n_packets must be >= 1")
        if self.s <= 0:
            raise InvalidSpec("skew s must be > 0")


def zipf_masses(n: int, s: float) -> np.ndarray:
    """Normalized rank masses r^-s / H_n(s) for ranks 1..n."""
    weights = np.arange(1, n + 1, dtype=np.float64) ** -s
    return weights / weights.sum()


def generate_zipf(rib: Sequence[RibEntry], spec: ZipfSpec) -> np.ndarray:
    """Deterministic skewed destination trace as a uint32 address array.

    Routes are ranked by a seed-keyed permutation; each draw picks a rank
    and emits a random address under that route that no longer route
    covers, falling back to any covered address when the route's own
    address space is fully shadowed by more-specific routes.
    """
    if spec.population is not None:
        return _zipf_over_destinations(spec)
    if not rib:
        raise InvalidSpec("route table is empty")
    rng = np.random.default_rng(spec.seed)
    # Deduplicate (last wins) so ranks map to effective routes.
    table: dict[IpPrefix, NextHop] = {}
    for prefix, nh in rib:
        table[prefix] = nh
    prefixes = list(table)
    perm = rng.permutation(len(prefixes))
    ranked = [prefixes[i] for i in perm]

    trie = FibTrie.build(table.items())
    # A route with no more-specific routes under it cannot be shadowed;
    # any address under it is already its own longest match.
    shadowed = np.zeros(len(ranked), dtype=bool)
    for i, prefix in enumerate(ranked):
        shadowed[i] = trie.has_routes_below(prefix)

    masses = zipf_masses(len(ranked), spec.s)
    cdf = np.cumsum(masses)
    cdf[-1] = 1.0
    draws = np.searchsorted(cdf, rng.random(spec.n_packets), side="right")

    base = np.array([p.address for p in ranked], dtype=np.uint32)
    host_mask = np.array([(1 << (32 - p.length)) - 1 for p in ranked], dtype=np.uint32)
    offsets = rng.integers(0, 1 << 32, size=spec.n_packets, dtype=np.uint32)
    dsts = base[draws] | (offsets & host_mask[draws])

    # Redraw destinations that landed under a more-specific route.
    retry = np.nonzero(shadowed[draws])[0]
    for i in retry:
        rank = draws[i]
        prefix = ranked[rank]
        dst = int(dsts[i])
        for _ in range(32):
            match = trie.lpm(dst)
            if match is not None and match[0] == prefix:
                break
            dst = prefix.address | (int(rng.integers(0, 1 << 32)) & int(host_mask[rank]))
        dsts[i] = dst
    return dsts


def _zipf_over_destinations(spec: ZipfSpec) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    population = np.asarray(spec.population, dtype=np.uint32)
    if population.size == 0:
        raise InvalidSpec("population must not be empty")
    perm = rng.permutation(population.size)
    masses = zipf_masses(population.size, spec.s)
    cdf = np.cumsum(masses)
    cdf[-1] = 1.0
    draws = np.searchsorted(cdf, rng.random(spec.n_packets), side="right")
    return population[perm[draws]]


def packets_from_addresses(addresses) -> Iterator[PacketRecord]:
    """Wrap a destination sequence as PacketRecords with seq 1..N."""
    for i, dst in enumerate(addresses, start=1):
        yield PacketRecord(i, int(dst))


def synthesize_rib(n_routes: int, seed: int = 0, next_hops: int = 64) -> list[RibEntry]:
    """Deterministic route table: a default route plus random prefixes with
    a realistic length mix (nesting arises naturally from collisions)."""
    if n_routes < 1:
        raise InvalidSpec("n_routes must be >= 1")
    rng = np.random.default_rng(seed)
    lengths = (8, 10, 12, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24)
    weights = np.array([1, 1, 2, 3, 3, 10, 4, 6, 6, 8, 6, 10, 8, 32], dtype=np.float64)
    weights /= weights.sum()
    routes: list[RibEntry] = [(IpPrefix(0, 0), 1)]
    seen = {IpPrefix(0, 0)}
    while len(routes) < n_routes:
        need = n_routes - len(routes)
        lens = rng.choice(lengths, size=need * 2, p=weights)
        addrs = rng.integers(0, 1 << 32, size=need * 2, dtype=np.uint32)
        nhs = rng.integers(1, next_hops + 1, size=need * 2)
        for length, addr, nh in zip(lens, addrs, nhs):
            length = int(length)
            prefix = IpPrefix(int(addr) & ((0xFFFFFFFF << (32 - length)) & 0xFFFFFFFF), length)
            if prefix in seen:
                continue
            seen.add(prefix)
            routes.append((prefix, int(nh)))
            if len(routes) == n_routes:
                break
    return routes

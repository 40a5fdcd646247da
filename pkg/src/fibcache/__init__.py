"""Deterministic simulator of a tiered FIB cache: small TCAM and SRAM
caches of non-overlapping prefixes in front of a full routing table, with
windowed miss-ratio and occupancy measurement."""

from .cache import CacheEntry, CacheTier, OverlapViolation
from .driver import ReplayResult, replay, validate
from .engine import (
    Engine,
    EngineSnapshot,
    ForwardingOutcome,
    Insert,
    InvariantViolation,
    PacketRecord,
    PipelineConfig,
    SequenceGap,
    ServedBy,
    Withdraw,
)
from .oracle import LinearScanFib
from .prefix import (
    IpPrefix,
    MalformedPrefix,
    NonCanonical,
    contains,
    covers,
    format_addr,
    parse_addr,
    parse_prefix,
    prefix_of,
)
from .stats import EmptyWindow, OccupancySample, StatsSink, WindowStat
from .traceio import (
    InvalidSpec,
    ParseError,
    ZipfSpec,
    dump_rib,
    dump_trace,
    generate_zipf,
    load_rib,
    load_trace,
    load_updates,
    packets_from_addresses,
    synthesize_rib,
)
from .trie import CacheRoute, FibTrie, RouteLocation, TrieStats, UnknownCachePrefix, UnknownRoute

__all__ = [
    "CacheEntry",
    "CacheRoute",
    "CacheTier",
    "EmptyWindow",
    "Engine",
    "EngineSnapshot",
    "FibTrie",
    "ForwardingOutcome",
    "Insert",
    "InvalidSpec",
    "InvariantViolation",
    "IpPrefix",
    "LinearScanFib",
    "MalformedPrefix",
    "NonCanonical",
    "OccupancySample",
    "OverlapViolation",
    "PacketRecord",
    "ParseError",
    "PipelineConfig",
    "ReplayResult",
    "RouteLocation",
    "SequenceGap",
    "ServedBy",
    "StatsSink",
    "TrieStats",
    "UnknownCachePrefix",
    "UnknownRoute",
    "WindowStat",
    "Withdraw",
    "ZipfSpec",
    "contains",
    "covers",
    "dump_rib",
    "dump_trace",
    "format_addr",
    "generate_zipf",
    "load_rib",
    "load_trace",
    "load_updates",
    "packets_from_addresses",
    "parse_addr",
    "parse_prefix",
    "prefix_of",
    "replay",
    "synthesize_rib",
    "validate",
]

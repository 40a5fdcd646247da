import random

import numpy as np

from fibcache import (
    CacheRoute,
    Engine,
    FibTrie,
    Insert,
    PipelineConfig,
    Withdraw,
    parse_addr,
    parse_prefix,
    replay,
    validate,
)
from fibcache.driver import _segments
from fibcache.traceio import packets_from_addresses

from conftest import random_rib


def test_replay_applies_updates_before_their_packet(toy_rib):
    engine = Engine(FibTrie.build(toy_rib), PipelineConfig(tcam_capacity=2, sram_capacity=2))
    dsts = [parse_addr("10.1.2.3")] * 3
    hops = []
    updates = [(3, Insert(parse_prefix("10.1.0.0/16"), 9))]
    replay(engine, packets_from_addresses(dsts), updates=updates, on_outcome=lambda p, o: hops.append(o.next_hop))
    assert hops == [3, 3, 9]


def test_replay_ignores_updates_past_trace_end(toy_rib):
    engine = Engine(FibTrie.build(toy_rib), PipelineConfig(tcam_capacity=2, sram_capacity=2))
    updates = [(100, Withdraw(parse_prefix("10.1.0.0/16")))]
    result = replay(engine, packets_from_addresses([parse_addr("10.1.2.3")]), updates=updates)
    assert result.packets == 1
    assert engine.trie.lpm(parse_addr("10.1.2.3"))[1] == 3


def test_replay_counts_drops():
    engine = Engine(FibTrie.build([(parse_prefix("10.0.0.0/8"), 1)]), PipelineConfig(tcam_capacity=2, sram_capacity=2))
    dsts = [parse_addr("10.0.0.1"), parse_addr("11.0.0.1"), parse_addr("12.0.0.1")]
    result = replay(engine, packets_from_addresses(dsts))
    assert result.packets == 3
    assert result.dropped == 2


def test_replay_closes_trailing_window(toy_rib):
    engine = Engine(FibTrie.build(toy_rib), PipelineConfig(tcam_capacity=2, sram_capacity=2, stats_window=2))
    replay(engine, packets_from_addresses([parse_addr("10.1.2.3")] * 5))
    assert [w.packets_in_window for w in engine.sink.windows] == [2, 2, 1]


def test_segments_split_points():
    pending = [(1, "a"), (5, "b"), (5, "c"), (12, "d")]
    runs = _segments(10, pending)
    assert runs == [(0, 4, ["a"]), (4, 10, ["b", "c"])]
    assert _segments(10, []) == [(0, 10, [])]
    assert _segments(0, pending) == [(0, 0, [])]


def test_validate_clean_run(toy_rib):
    engine = Engine(FibTrie.build(toy_rib), PipelineConfig(tcam_capacity=2, sram_capacity=2), check_invariants=True)
    rng = random.Random(61)
    dsts = np.array([rng.getrandbits(32) for _ in range(500)], dtype=np.uint64)
    result = validate(engine, dsts)
    assert result.ok
    assert result.packets == 500


def test_validate_empty_trace(toy_rib):
    engine = Engine(FibTrie.build(toy_rib))
    result = validate(engine, np.array([], dtype=np.uint64))
    assert result.ok
    assert result.packets == 0


def test_validate_with_interleaved_updates():
    rng = random.Random(67)
    entries = random_rib(rng, 200)
    engine = Engine(FibTrie.build(entries), PipelineConfig(tcam_capacity=8, sram_capacity=16), check_invariants=True)
    dsts = np.array([rng.getrandbits(32) for _ in range(2000)], dtype=np.uint64)
    live = [p for p, _ in entries]
    updates = []
    for seq in range(100, 2000, 100):
        if rng.random() < 0.5 or not live:
            prefix = parse_prefix(f"{rng.randint(1, 250)}.{rng.randint(0, 255)}.0.0/16")
            updates.append((seq, Insert(prefix, rng.randint(1, 16))))
            if prefix not in live:
                live.append(prefix)
        else:
            updates.append((seq, Withdraw(live.pop(rng.randrange(len(live))))))
    result = validate(engine, dsts, updates=updates)
    assert result.ok, result.violations[:1]


def test_validate_detects_corrupted_cache_entry(toy_rib):
    """Fault injection: flip a cached next hop behind the engine's back and
    the per-packet reference comparison must name the packet."""
    engine = Engine(FibTrie.build(toy_rib), PipelineConfig(tcam_capacity=2, sram_capacity=2))
    dsts = np.array([parse_addr("10.2.3.4")] * 5, dtype=np.uint64)

    original_install = engine.sram.install

    def corrupting_install(route, now=None):
        return original_install(CacheRoute(route.prefix, route.next_hop + 1), now)

    engine.sram.install = corrupting_install
    result = validate(engine, dsts)
    assert not result.ok
    assert "packet" in result.violations[0]


def test_validate_detects_flag_corruption(toy_rib):
    from fibcache import RouteLocation

    engine = Engine(FibTrie.build(toy_rib), PipelineConfig(tcam_capacity=2, sram_capacity=2), check_invariants=True)
    engine.warm_start([parse_addr("10.2.3.4")])
    engine.trie.set_location(parse_prefix("10.2.0.0/15"), RouteLocation.IN_TCAM)
    violations = engine.verify_state()
    assert violations

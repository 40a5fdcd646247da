import io
import math

import numpy as np
import pytest

from fibcache import (
    FibTrie,
    Insert,
    InvalidSpec,
    ParseError,
    Withdraw,
    ZipfSpec,
    dump_rib,
    dump_trace,
    generate_zipf,
    load_rib,
    load_trace,
    load_updates,
    parse_prefix,
    synthesize_rib,
)
from fibcache.traceio import parse_update, zipf_masses


def test_load_rib_single_line():
    routes = load_rib(io.StringIO("10.0.0.0/8 3\n"))
    assert routes == [(parse_prefix("10.0.0.0/8"), 3)]


def test_load_rib_skips_comments_and_blanks():
    routes = load_rib(io.StringIO("# comment\n\n0.0.0.0/0 1\n"))
    assert routes == [(parse_prefix("0.0.0.0/0"), 1)]


def test_load_rib_noncanonical_names_line():
    with pytest.raises(ParseError) as err:
        load_rib(io.StringIO("10.0.0.1/8 3\n"))
    assert err.value.line_no == 1
    assert "host bits" in err.value.reason


def test_load_rib_bad_next_hop():
    with pytest.raises(ParseError):
        load_rib(io.StringIO("10.0.0.0/8 x\n"))


def test_rib_round_trip(tmp_path):
    routes = synthesize_rib(500, seed=3)
    path = tmp_path / "rib.txt"
    dump_rib(routes, path)
    assert load_rib(path) == routes


def test_load_trace_assigns_sequence():
    packets = list(load_trace(io.StringIO("10.1.2.3\n10.2.3.4\n")))
    assert [(p.seq, p.dst) for p in packets] == [(1, 0x0A010203), (2, 0x0A020304)]


def test_load_trace_limit():
    packets = list(load_trace(io.StringIO("10.1.2.3\n10.2.3.4\n"), limit=1))
    assert len(packets) == 1


def test_load_trace_bad_address():
    with pytest.raises(ParseError) as err:
        list(load_trace(io.StringIO("999.1.1.1\n")))
    assert err.value.line_no == 1


def test_trace_round_trip(tmp_path):
    path = tmp_path / "trace.txt"
    dump_trace([0x0A010203, 0xFFFFFFFF, 0], path)
    assert [p.dst for p in load_trace(path)] == [0x0A010203, 0xFFFFFFFF, 0]


def test_parse_update_forms():
    assert parse_update("I 10.0.0.0/8 3") == Insert(parse_prefix("10.0.0.0/8"), 3)
    assert parse_update("W 10.0.0.0/8") == Withdraw(parse_prefix("10.0.0.0/8"))
    for bad in ["X 10.0.0.0/8", "I 10.0.0.0/8", "W", "I 10.0.0.0/8 3 4"]:
        with pytest.raises(ValueError):
            parse_update(bad)


def test_load_updates_sidecar_sorted():
    text = "500 W 10.0.0.0/8\n10 I 172.16.0.0/12 7\n"
    updates = load_updates(io.StringIO(text))
    assert updates == [
        (10, Insert(parse_prefix("172.16.0.0/12"), 7)),
        (500, Withdraw(parse_prefix("10.0.0.0/8"))),
    ]


def test_load_updates_bad_line():
    with pytest.raises(ParseError) as err:
        load_updates(io.StringIO("10 I 10.0.0.0/8 3\nnope\n"))
    assert err.value.line_no == 2


def test_zipf_spec_validation():
    with pytest.raises(InvalidSpec):
        ZipfSpec(n_packets=0)
    with pytest.raises(InvalidSpec):
        ZipfSpec(n_packets=10, s=0.0)
    with pytest.raises(InvalidSpec):
        ZipfSpec(n_packets=10, s=-1.0)


def test_zipf_single_route_rib():
    rib = [(parse_prefix("0.0.0.0/0"), 1)]
    dsts = generate_zipf(rib, ZipfSpec(n_packets=3, seed=5))
    assert dsts.shape == (3,)


def test_zipf_deterministic():
    rib = synthesize_rib(200, seed=1)
    spec = ZipfSpec(n_packets=5000, s=1.1, seed=42)
    a = generate_zipf(rib, spec)
    b = generate_zipf(rib, spec)
    assert np.array_equal(a, b)
    c = generate_zipf(rib, ZipfSpec(n_packets=5000, s=1.1, seed=43))
    assert not np.array_equal(a, c)


def test_zipf_destinations_covered_by_rib():
    rib = synthesize_rib(300, seed=9)
    trie = FibTrie.build(rib)
    dsts = generate_zipf(rib, ZipfSpec(n_packets=2000, seed=9))
    for dst in dsts[:500]:
        assert trie.lpm(int(dst)) is not None


def test_zipf_emits_addresses_matched_by_the_drawn_route():
    """Unshadowed draws must produce an address whose LPM is the ranked
    route itself, so rank frequencies survive the address sampling."""
    rib = [(parse_prefix(f"{i}.0.0.0/8"), i + 1) for i in range(1, 200)]
    trie = FibTrie.build(rib)
    dsts = generate_zipf(rib, ZipfSpec(n_packets=5000, seed=17, s=1.0))
    for dst in dsts[:1000]:
        assert trie.lpm(int(dst)) is not None


def test_zipf_rank_frequencies_match_analytic_mass():
    """Frequency of ranks 1..10 within 20% of r^-s/H for s=1.2 over a
    1000-route table (the generator fidelity contract)."""
    n_routes, n_packets, s = 1000, 100_000, 1.2
    rib = [(parse_prefix(f"{(i >> 8) & 255}.{i & 255}.0.0/16"), 1) for i in range(n_routes)]
    dsts = generate_zipf(rib, ZipfSpec(n_packets=n_packets, s=s, seed=7))
    top16 = np.asarray(dsts) >> 16
    counts = {}
    for key in top16:
        counts[int(key)] = counts.get(int(key), 0) + 1
    observed = sorted(counts.values(), reverse=True)
    masses = zipf_masses(n_routes, s)
    for rank in range(10):
        expected = masses[rank] * n_packets
        assert abs(observed[rank] - expected) <= 0.2 * expected
    # Plurality goes to the top-ranked route.
    assert observed[0] == max(observed)


def test_zipf_explicit_destination_population():
    population = [0x0A000001, 0x0B000001, 0x0C000001]
    spec = ZipfSpec(n_packets=1000, s=1.0, seed=3, population=population)
    dsts = generate_zipf([], spec)
    assert set(int(d) for d in dsts) <= set(population)
    again = generate_zipf([], spec)
    assert np.array_equal(dsts, again)


def test_zipf_masses_normalized():
    for s in (0.8, 1.0, 1.2):
        masses = zipf_masses(1000, s)
        assert math.isclose(masses.sum(), 1.0, rel_tol=1e-12)
        assert all(masses[i] > masses[i + 1] for i in range(len(masses) - 1))


def test_synthesize_rib_shape():
    routes = synthesize_rib(1000, seed=11)
    assert len(routes) == 1000
    assert routes[0] == (parse_prefix("0.0.0.0/0"), 1)
    assert len({p for p, _ in routes}) == 1000
    assert synthesize_rib(1000, seed=11) == routes

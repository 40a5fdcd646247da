import random

import numpy as np

from fibcache import LinearScanFib, parse_prefix

from conftest import random_rib


def test_empty_table():
    fib = LinearScanFib()
    assert fib.lookup(0x0A000001) is None
    nh, ok = fib.lookup_batch(np.array([1, 2, 3], dtype=np.uint64))
    assert not ok.any()


def test_last_wins_duplicates():
    fib = LinearScanFib([(parse_prefix("10.0.0.0/8"), 1), (parse_prefix("10.0.0.0/8"), 2)])
    assert fib.lookup(0x0A000001) == (parse_prefix("10.0.0.0/8"), 2)


def test_batch_matches_scalar():
    rng = random.Random(59)
    for _ in range(5):
        fib = LinearScanFib(random_rib(rng, 200, with_default=rng.random() < 0.5))
        addrs = np.array([rng.getrandbits(32) for _ in range(1000)], dtype=np.uint64)
        nh, ok = fib.lookup_batch(addrs, chunk=137)
        for i, addr in enumerate(addrs):
            expected = fib.lookup(int(addr))
            if expected is None:
                assert not ok[i]
            else:
                assert ok[i] and nh[i] == expected[1]


def test_updates_invalidate_cached_arrays():
    fib = LinearScanFib([(parse_prefix("0.0.0.0/0"), 1)])
    addrs = np.array([0x0A000001], dtype=np.uint64)
    nh, ok = fib.lookup_batch(addrs)
    assert ok[0] and nh[0] == 1
    fib.insert(parse_prefix("10.0.0.0/8"), 7)
    nh, ok = fib.lookup_batch(addrs)
    assert ok[0] and nh[0] == 7
    fib.withdraw(parse_prefix("10.0.0.0/8"))
    nh, ok = fib.lookup_batch(addrs)
    assert ok[0] and nh[0] == 1

import random

import pytest

from fibcache import FibTrie, IpPrefix, parse_prefix, prefix_of


@pytest.fixture
def toy_rib():
    """Three-route table used by the worked pipeline scenario."""
    return [
        (parse_prefix("0.0.0.0/0"), 1),
        (parse_prefix("10.0.0.0/8"), 2),
        (parse_prefix("10.1.0.0/16"), 3),
    ]


@pytest.fixture
def toy_trie(toy_rib):
    return FibTrie.build(toy_rib)


def random_prefix(rng: random.Random, max_len: int = 28) -> IpPrefix:
    length = rng.randint(0, max_len)
    return prefix_of(rng.getrandbits(32), length)


def random_rib(rng: random.Random, n_routes: int, with_default: bool = True):
    routes = []
    if with_default:
        routes.append((IpPrefix(0, 0), rng.randint(1, 16)))
    seen = {IpPrefix(0, 0)} if with_default else set()
    while len(routes) < n_routes:
        prefix = prefix_of(rng.getrandbits(32), rng.randint(4, 28))
        if prefix in seen:
            continue
        seen.add(prefix)
        routes.append((prefix, rng.randint(1, 16)))
    return routes

"""Full forwarding table: a binary trie over prefix bits.

The trie plays the "slow full table" role. It holds the real routes, does
longest-prefix matching, and manufactures the disjoint cacheable prefixes
the cache tiers are allowed to hold. For every cacheable prefix it also
tracks residency (which tier currently holds it), so the packet pipeline
can reconcile cache hits against the authoritative table.

Two structural invariants make cached forwarding safe:

* leaf property: no real route is strictly covered by a generated prefix,
  so every address under a generated prefix shares one next hop;
* disjointness: generated prefixes never cover one another, so any cache
  lookup matches at most one entry.

Route updates use conservative invalidation: any generated prefix that
overlaps the changed route is discarded and must be regenerated by later
traffic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .prefix import ADDR_BITS, MASKS, IpPrefix, NextHop, prefix_of


class RouteLocation(enum.Enum):
    UNCACHED = "uncached"
    IN_TCAM = "tcam"
    IN_SRAM = "sram"


class UnknownCachePrefix(KeyError):
    """The prefix was never produced by generate_cacheable."""


class UnknownRoute(KeyError):
    """Withdraw target is not a real route."""


@dataclass(frozen=True, slots=True)
class CacheRoute:
    """A generated, non-overlapping prefix and the next hop it forwards to."""

    prefix: IpPrefix
    next_hop: NextHop


@dataclass(frozen=True, slots=True)
class TrieStats:
    real_routes: int
    generated_total: int
    in_tcam: int
    in_sram: int
    uncached: int


class _Node:
    __slots__ = ("zero", "one", "real_nh", "gen_nh", "gen_loc", "reals_below", "gens_below")

    def __init__(self):
        self.zero = None
        self.one = None
        self.real_nh = None      # next hop of a real route ending here
        self.gen_nh = None       # next hop of a generated cache prefix ending here
        self.gen_loc = None      # RouteLocation while gen_nh is set
        self.reals_below = 0     # real routes in this subtree, self included
        self.gens_below = 0      # generated prefixes in this subtree, self included


class FibTrie:
    """Binary trie over IPv4 prefix bits holding real and generated routes."""

    def __init__(self):
        self._root = _Node()
        self._real_count = 0
        self._loc_counts = {loc: 0 for loc in RouteLocation}

    # -- construction -----------------------------------------------------

    @classmethod
    def build(cls, entries) -> "FibTrie":
        """Build from (prefix, next_hop) pairs; duplicate prefixes last-wins."""
        trie = cls()
        for prefix, nh in entries:
            trie._insert_real(prefix, nh)
        return trie

    def _walk_path(self, addr: int, depth: int):
        """Nodes along addr's bit path from the root, stopping where the trie ends.

        Returns a list whose index is the node depth; shorter than depth+1
        when the path is not materialized that far.
        """
        path = [self._root]
        node = self._root
        for d in range(depth):
            node = node.one if (addr >> (ADDR_BITS - 1 - d)) & 1 else node.zero
            if node is None:
                break
            path.append(node)
        return path

    def _extend_path(self, addr: int, depth: int) -> list:
        """Like _walk_path but creates missing nodes down to ``depth``."""
        path = [self._root]
        node = self._root
        for d in range(depth):
            bit = (addr >> (ADDR_BITS - 1 - d)) & 1
            child = node.one if bit else node.zero
            if child is None:
                child = _Node()
                if bit:
                    node.one = child
                else:
                    node.zero = child
            path.append(child)
            node = child
        return path

    def _insert_real(self, prefix: IpPrefix, nh: NextHop) -> None:
        path = self._extend_path(prefix.address, prefix.length)
        node = path[-1]
        if node.real_nh is None:
            for p in path:
                p.reals_below += 1
            self._real_count += 1
        node.real_nh = nh

    # -- lookups ----------------------------------------------------------

    def lpm(self, addr: int):
        """Longest real-route match: (prefix, next_hop), or None when nothing covers addr."""
        node = self._root
        best_len = -1
        best_nh = None
        depth = 0
        while node is not None:
            if node.real_nh is not None:
                best_len = depth
                best_nh = node.real_nh
            if depth == ADDR_BITS:
                break
            node = node.one if (addr >> (ADDR_BITS - 1 - depth)) & 1 else node.zero
            depth += 1
        if best_len < 0:
            return None
        return prefix_of(addr, best_len), best_nh

    def generate_cacheable(self, addr: int):
        """Produce the disjoint cacheable prefix covering ``addr``.

        The result is the shortest extension of the LPM match that strictly
        covers no real route (leaf property) and no other generated prefix
        (disjointness). Re-generating under an existing generated prefix
        returns that prefix unchanged, so generation is idempotent while the
        table is quiet.

        Returns a CacheRoute, or None when no real route covers addr.
        """
        path = self._walk_path(addr, ADDR_BITS)
        match_len = -1
        match_nh = None
        for depth, node in enumerate(path):
            if node.real_nh is not None:
                match_len = depth
                match_nh = node.real_nh
        if match_len < 0:
            return None
        for length in range(match_len, ADDR_BITS + 1):
            node = path[length] if length < len(path) else None
            if node is None:
                break
            if node.gen_nh is not None:
                return CacheRoute(prefix_of(addr, length), node.gen_nh)
            if node.reals_below == (1 if node.real_nh is not None else 0) and node.gens_below == 0:
                break
        else:
            raise AssertionError("unreachable: host route always terminates the scan")
        target = prefix_of(addr, length)
        path = self._extend_path(target.address, target.length)
        node = path[-1]
        node.gen_nh = match_nh
        node.gen_loc = RouteLocation.UNCACHED
        for p in path:
            p.gens_below += 1
        self._loc_counts[RouteLocation.UNCACHED] += 1
        return CacheRoute(target, match_nh)

    # -- residency flags ---------------------------------------------------

    def _gen_node(self, prefix: IpPrefix) -> _Node:
        path = self._walk_path(prefix.address, prefix.length)
        if len(path) != prefix.length + 1 or path[-1].gen_nh is None:
            raise UnknownCachePrefix(str(prefix))
        return path[-1]

    def set_location(self, prefix: IpPrefix, loc: RouteLocation) -> None:
        node = self._gen_node(prefix)
        if node.gen_loc is not loc:
            self._loc_counts[node.gen_loc] -= 1
            self._loc_counts[loc] += 1
            node.gen_loc = loc

    def get_location(self, prefix: IpPrefix) -> RouteLocation:
        return self._gen_node(prefix).gen_loc

    # -- updates ------------------------------------------------------------

    def _collect_gens(self, node: _Node, addr: int, depth: int, out: list) -> None:
        """Collect and clear every generated prefix in this subtree."""
        if node.gens_below == 0:
            return
        if node.gen_nh is not None:
            out.append(prefix_of(addr, depth))
            node.gen_nh = None
            self._loc_counts[node.gen_loc] -= 1
            node.gen_loc = None
            node.gens_below -= 1
        removed_here = len(out)
        if node.zero is not None:
            self._collect_gens(node.zero, addr, depth + 1, out)
        if node.one is not None:
            self._collect_gens(node.one, addr | (1 << (ADDR_BITS - 1 - depth)), depth + 1, out)
        node.gens_below -= len(out) - removed_here

    def _invalidate_overlapping(self, prefix: IpPrefix) -> list[IpPrefix]:
        """Drop every generated prefix that covers or is covered by ``prefix``."""
        invalidated: list[IpPrefix] = []
        path = self._walk_path(prefix.address, prefix.length)
        # Generated prefixes on the path above (or at) prefix cover it.
        for depth, node in enumerate(path[:-1] if len(path) == prefix.length + 1 else path):
            if node.gen_nh is not None:
                invalidated.append(prefix_of(prefix.address, depth))
                node.gen_nh = None
                self._loc_counts[node.gen_loc] -= 1
                node.gen_loc = None
                for p in path[: depth + 1]:
                    p.gens_below -= 1
        # Everything under prefix (including an equal-length marker) is covered by it.
        if len(path) == prefix.length + 1:
            subtree = path[-1]
            before = len(invalidated)
            self._collect_gens(subtree, prefix.address, prefix.length, invalidated)
            newly = len(invalidated) - before
            if newly:
                for p in path[:-1]:
                    p.gens_below -= newly
        return invalidated

    def insert_route(self, prefix: IpPrefix, nh: NextHop) -> list[IpPrefix]:
        """Insert or replace a real route.

        Returns the generated prefixes invalidated by the change so the
        caller can purge them from the cache tiers.
        """
        invalidated = self._invalidate_overlapping(prefix)
        self._insert_real(prefix, nh)
        return invalidated

    def withdraw_route(self, prefix: IpPrefix) -> list[IpPrefix]:
        """Remove a real route; same invalidation contract as insert_route."""
        path = self._walk_path(prefix.address, prefix.length)
        if len(path) != prefix.length + 1 or path[-1].real_nh is None:
            raise UnknownRoute(str(prefix))
        invalidated = self._invalidate_overlapping(prefix)
        node = path[-1]
        node.real_nh = None
        for p in path:
            p.reals_below -= 1
        self._real_count -= 1
        return invalidated

    # -- introspection -------------------------------------------------------

    def has_routes_below(self, prefix: IpPrefix) -> bool:
        """True iff some real route is strictly covered by ``prefix``."""
        path = self._walk_path(prefix.address, prefix.length)
        if len(path) != prefix.length + 1:
            return False
        node = path[-1]
        return node.reals_below > (1 if node.real_nh is not None else 0)

    def stats(self) -> TrieStats:
        counts = self._loc_counts
        return TrieStats(
            real_routes=self._real_count,
            generated_total=sum(counts.values()),
            in_tcam=counts[RouteLocation.IN_TCAM],
            in_sram=counts[RouteLocation.IN_SRAM],
            uncached=counts[RouteLocation.UNCACHED],
        )

    def iter_generated(self):
        """Yield (prefix, next_hop, location) for every generated prefix."""
        stack = [(self._root, 0, 0)]
        while stack:
            node, addr, depth = stack.pop()
            if node.gens_below == 0:
                continue
            if node.gen_nh is not None:
                yield prefix_of(addr, depth), node.gen_nh, node.gen_loc
            if node.one is not None:
                stack.append((node.one, addr | (1 << (ADDR_BITS - 1 - depth)), depth + 1))
            if node.zero is not None:
                stack.append((node.zero, addr, depth + 1))

    def iter_routes(self):
        """Yield (prefix, next_hop) for every real route."""
        stack = [(self._root, 0, 0)]
        while stack:
            node, addr, depth = stack.pop()
            if node.reals_below == 0:
                continue
            if node.real_nh is not None:
                yield prefix_of(addr, depth), node.real_nh
            if node.one is not None:
                stack.append((node.one, addr | (1 << (ADDR_BITS - 1 - depth)), depth + 1))
            if node.zero is not None:
                stack.append((node.zero, addr, depth + 1))

    def check_structure(self) -> list[str]:
        """Verify trie invariants; returns human-readable violations."""
        problems: list[str] = []
        gens: list[IpPrefix] = []

        def visit(node: _Node, addr: int, depth: int) -> tuple[int, int]:
            reals = 1 if node.real_nh is not None else 0
            gens_here = 1 if node.gen_nh is not None else 0
            if node.gen_nh is not None:
                gens.append(prefix_of(addr, depth))
            for bit, child in ((0, node.zero), (1, node.one)):
                if child is None:
                    continue
                caddr = addr | (bit << (ADDR_BITS - 1 - depth))
                r, g = visit(child, caddr, depth + 1)
                if node.gen_nh is not None and r:
                    problems.append(f"real route strictly under generated {prefix_of(addr, depth)}")
                if node.gen_nh is not None and g:
                    problems.append(f"generated prefix strictly under generated {prefix_of(addr, depth)}")
                reals += r
                gens_here += g
            if reals != node.reals_below:
                problems.append(f"reals_below mismatch at depth {depth}")
            if gens_here != node.gens_below:
                problems.append(f"gens_below mismatch at depth {depth}")
            return reals, gens_here

        total_reals, total_gens = visit(self._root, 0, 0)
        if total_reals != self._real_count:
            problems.append("real route counter out of sync")
        if total_gens != sum(self._loc_counts.values()):
            problems.append("location counters out of sync")
        return problems

    def __len__(self) -> int:
        return self._real_count

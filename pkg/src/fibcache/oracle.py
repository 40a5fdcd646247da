"""Reference longest-prefix-match by linear scan.

This is the independent check used by the validation paths and the test
suite. It deliberately shares no code with the trie: routes live in a flat
dict and matching is a scan over all of them (vectorized with numpy for
whole-trace validation runs).
"""

from __future__ import annotations

import numpy as np

from .prefix import ADDR_BITS, MASKS, IpPrefix, NextHop


class LinearScanFib:
    """A flat route table with scan-based LPM, mirroring engine updates."""

    def __init__(self, entries=()):
        # Last-wins on duplicate prefixes, same as the trie's build rule.
        self.routes: dict[IpPrefix, NextHop] = {}
        for prefix, nh in entries:
            self.routes[prefix] = nh
        self._arrays = None

    def insert(self, prefix: IpPrefix, nh: NextHop) -> None:
        self.routes[prefix] = nh
        self._arrays = None

    def withdraw(self, prefix: IpPrefix) -> None:
        del self.routes[prefix]
        self._arrays = None

    def lookup(self, addr: int):
        """Scan every route; return (prefix, next_hop) of the longest match or None."""
        best = None
        best_len = -1
        for prefix, nh in self.routes.items():
            if prefix.length > best_len and (addr & MASKS[prefix.length]) == prefix.address:
                best = (prefix, nh)
                best_len = prefix.length
        return best

    def _route_arrays(self):
        if self._arrays is None:
            n = len(self.routes)
            addrs = np.empty(n, dtype=np.uint64)
            lens = np.empty(n, dtype=np.uint64)
            nhs = np.empty(n, dtype=np.int64)
            for i, (prefix, nh) in enumerate(self.routes.items()):
                addrs[i] = prefix.address
                lens[i] = prefix.length
                nhs[i] = nh
            self._arrays = (addrs, lens, nhs)
        return self._arrays

    def lookup_batch(self, addrs: np.ndarray, chunk: int = 4096):
        """Vectorized scan over many destinations.

        Returns (next_hops, matched): next hop per destination (undefined
        where matched is False) and a bool mask of destinations covered by
        at least one route.
        """
        addrs = np.ascontiguousarray(addrs, dtype=np.uint64)
        n = addrs.shape[0]
        out_nh = np.zeros(n, dtype=np.int64)
        out_ok = np.zeros(n, dtype=bool)
        if not self.routes:
            return out_nh, out_ok
        raddr, rlen, rnh = self._route_arrays()
        shift = np.uint64(ADDR_BITS) - rlen
        for lo in range(0, n, chunk):
            hi = min(lo + chunk, n)
            block = addrs[lo:hi, None]
            # Top rlen bits equal <=> xor shifted right by (32 - rlen) is zero.
            match = ((block ^ raddr[None, :]) >> shift[None, :]) == 0
            lens_masked = np.where(match, rlen.astype(np.int64), -1)
            best = lens_masked.argmax(axis=1)
            best_len = lens_masked[np.arange(hi - lo), best]
            out_ok[lo:hi] = best_len >= 0
            out_nh[lo:hi] = rnh[best]
        return out_nh, out_ok

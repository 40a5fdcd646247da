"""Exact IPv4 prefix arithmetic.

Addresses are plain 32-bit unsigned ints, prefixes are (address, length)
pairs in canonical form: every bit below position ``32 - length`` is zero.
All other modules build on the three predicates here (containment,
coverage, truncation).
"""

from __future__ import annotations

from dataclasses import dataclass

# Next hops are small opaque interface/neighbor ids.
NextHop = int

ADDR_BITS = 32
ADDR_MAX = 0xFFFFFFFF

# MASKS[n] keeps the top n bits of an address.
MASKS = tuple(((ADDR_MAX << (ADDR_BITS - n)) & ADDR_MAX) if n else 0 for n in range(ADDR_BITS + 1))


class MalformedPrefix(ValueError):
    """Raised for syntactically invalid prefix or address text."""


class NonCanonical(ValueError):
    """Raised when a textual prefix has host bits set below its length."""


@dataclass(frozen=True, slots=True)
class IpPrefix:
    """Canonical IPv4 prefix: the top ``length`` bits of ``address``."""

    address: int
    length: int

    def __post_init__(self) -> None:
        if not 0 <= self.length <= ADDR_BITS:
            raise ValueError(f"prefix length {self.length} out of range")
        if not 0 <= self.address <= ADDR_MAX:
            raise ValueError(f"address {self.address:#x} is not 32-bit")
        if self.address & ~MASKS[self.length] & ADDR_MAX:
            raise ValueError(f"host bits set in {format_addr(self.address)}/{self.length}")

    def __str__(self) -> str:
        return f"{format_addr(self.address)}/{self.length}"


DEFAULT_ROUTE = IpPrefix(0, 0)


def parse_addr(text: str) -> int:
    """Parse a dotted-quad IPv4 address into an int."""
    parts = text.split(".")
    if len(parts) != 4:
        raise MalformedPrefix(f"expected dotted quad, got {text!r}")
    value = 0
    for part in parts:
        if not part.isdigit():
            raise MalformedPrefix(f"bad octet {part!r} in {text!r}")
        octet = int(part)
        if octet > 255:
            raise MalformedPrefix(f"octet {octet} > 255 in {text!r}")
        value = (value << 8) | octet
    return value


def format_addr(addr: int) -> str:
    return f"{(addr >> 24) & 0xFF}.{(addr >> 16) & 0xFF}.{(addr >> 8) & 0xFF}.{addr & 0xFF}"


def parse_prefix(text: str) -> IpPrefix:
    """Parse ``A.B.C.D/L`` text into a canonical prefix.

    Host bits set below the prefix length are rejected with NonCanonical
    rather than silently masked, so corrupt route files surface early.
    """
    addr_part, sep, len_part = text.partition("/")
    if not sep or not len_part:
        raise MalformedPrefix(f"missing /length in {text!r}")
    if not len_part.isdigit():
        raise MalformedPrefix(f"bad length {len_part!r} in {text!r}")
    length = int(len_part)
    if length > ADDR_BITS:
        raise MalformedPrefix(f"length {length} > 32 in {text!r}")
    addr = parse_addr(addr_part)
    if addr & ~MASKS[length] & ADDR_MAX:
        raise NonCanonical(f"host bits set below /{length} in {text!r}")
    return IpPrefix(addr, length)


def contains(p: IpPrefix, addr: int) -> bool:
    """True iff ``addr`` lies under prefix ``p`` (length 0 matches all)."""
    return (addr & MASKS[p.length]) == p.address


def covers(p: IpPrefix, q: IpPrefix) -> bool:
    """True iff ``p`` covers ``q``: p is no longer than q and contains its base."""
    return p.length <= q.length and (q.address & MASKS[p.length]) == p.address


def overlaps(p: IpPrefix, q: IpPrefix) -> bool:
    """Two prefixes share an address iff one covers the other."""
    return covers(p, q) or covers(q, p)


def prefix_of(addr: int, length: int) -> IpPrefix:
    """The canonical prefix formed by keeping the top ``length`` bits of ``addr``."""
    return IpPrefix(addr & MASKS[length], length)

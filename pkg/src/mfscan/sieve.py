"""Segmented factorization engine.

Produces the exact prime factorization of every integer in a window
[start, start + length) using a base-prime sieve up to sqrt(end).  Factor
pairs live in a flat arena (``primes``/``exps`` plus an ``offsets`` span
array) so that windows of 10^7 integers stay well under 2 GB and entries
never require per-integer allocation.

All arithmetic is unsigned 64-bit with explicit capacity checks; windows
must end at or below 2^62 so intermediate products cannot overflow.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from math import isqrt
from typing import Iterator, Tuple

import numpy as np

from .errors import CapacityError

WINDOW_CAPACITY = 1 << 62
PRIME_CAPACITY = 1 << 31

FactorEntry = Tuple[Tuple[int, int], ...]

# Base primes are cached and reused across windows; the cache holds the
# largest sieve computed so far and answers smaller requests by slicing.
_prime_cache: dict = {"limit": 0, "primes": np.empty(0, dtype=np.uint64)}


def primes_up_to(n: int) -> np.ndarray:
    """All primes in [2, n], ascending.

    Requires 2 <= n <= 2^31 (base primes are only ever needed up to the
    square root of a window end, which is capped at 2^62).
    """
    if n < 2:
        raise ValueError(f"primes_up_to requires n >= 2, got {n}")
    if n > PRIME_CAPACITY:
        raise CapacityError(f"primes_up_to limited to n <= 2^31, got {n}")
    cache = _prime_cache
    if n <= cache["limit"]:
        primes = cache["primes"]
        return primes[: np.searchsorted(primes, n, side="right")]
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    primes = np.flatnonzero(flags).astype(np.uint64)
    primes.setflags(write=False)
    _prime_cache.update(limit=n, primes=primes)
    return primes


def primes_in_range(lo: int, hi: int) -> np.ndarray:
    """Primes in [lo, hi], ascending, via a segmented mark-off."""
    if hi < lo or hi < 2:
        return np.empty(0, dtype=np.uint64)
    lo = max(lo, 2)
    if hi + 1 > WINDOW_CAPACITY:
        raise CapacityError(f"prime range end {hi} exceeds 2^62")
    length = hi - lo + 1
    flags = np.ones(length, dtype=bool)
    for p in primes_up_to(max(isqrt(hi), 2)):
        p = int(p)
        if p * p > hi:
            break
        first = max(p * p, ((lo + p - 1) // p) * p)
        if first > hi:
            continue
        flags[first - lo :: p] = False
    return (np.flatnonzero(flags) + lo).astype(np.uint64)


def _hitting_primes(primes: np.ndarray, start: int, length: int):
    """(p, first-offset) for base primes with a multiple in the window.

    The first-multiple offsets are computed vectorized so short windows
    with large base-prime lists skip the misses without a Python-level
    pass over every prime.
    """
    first = (-np.int64(start)) % primes.astype(np.int64)
    hits = np.flatnonzero(first < length)
    return zip(
        (int(p) for p in primes[hits]), (int(f) for f in first[hits])
    )


@dataclass(frozen=True)
class Window:
    """A contiguous run of ``length`` integers starting at ``start``."""

    start: int
    length: int

    def __post_init__(self):
        if self.start < 1:
            raise ValueError(f"window start must be >= 1, got {self.start}")
        if self.length < 1:
            raise ValueError(f"window length must be >= 1, got {self.length}")
        if self.start + self.length > WINDOW_CAPACITY:
            raise CapacityError(
                f"window end {self.start + self.length} exceeds capacity 2^62"
            )

    @property
    def end(self) -> int:
        """One past the last integer in the window."""
        return self.start + self.length


class FactorTable:
    """Complete factorizations for one window, stored in a flat arena.

    ``offsets`` has ``length + 1`` entries; the factor pairs of the
    integer at offset i are ``primes[offsets[i]:offsets[i+1]]`` with
    matching ``exps``.  Primes strictly increase within each entry and
    the entry for n = 1 is empty.  Instances are immutable after
    construction and safe to share across threads.
    """

    __slots__ = ("window", "offsets", "primes", "exps")

    def __init__(self, window: Window, offsets, primes, exps):
        self.window = window
        self.offsets = offsets
        self.primes = primes
        self.exps = exps
        for arr in (offsets, primes, exps):
            arr.setflags(write=False)

    @property
    def size(self) -> int:
        return self.window.length

    def n(self, i: int) -> int:
        return self.window.start + i

    def entry(self, i: int) -> FactorEntry:
        """The (prime, exponent) pairs of the integer at offset i."""
        lo, hi = int(self.offsets[i]), int(self.offsets[i + 1])
        return tuple(
            (int(p), int(e)) for p, e in zip(self.primes[lo:hi], self.exps[lo:hi])
        )

    def entries(self) -> Iterator[FactorEntry]:
        for i in range(self.size):
            yield self.entry(i)

    def reconstruct(self, i: int) -> int:
        """Product of p^e over entry i; equals n(i) by construction."""
        value = 1
        for p, e in self.entry(i):
            value *= p**e
        return value


def sieve_factorize(window: Window) -> FactorTable:
    """Factor every integer in the window.

    Prime divisors up to sqrt(end) are marked by stepping through the
    window; exponents come from repeated division of a residual copy.
    Whatever residual exceeds 1 afterwards is a prime above sqrt(end)
    and enters the arena with exponent 1.
    """
    start, length = window.start, window.length
    end = window.end  # exclusive
    res = np.arange(start, end, dtype=np.uint64)
    pair_count = np.zeros(length, dtype=np.int64)
    marks = []
    root = isqrt(end - 1)
    if root >= 2:
        for p, first in _hitting_primes(primes_up_to(root), start, length):
            pos = np.arange(first, length, p, dtype=np.int64)
            sub = res[first::p]
            sub //= p
            exps = np.ones(pos.size, dtype=np.uint32)
            div = np.flatnonzero(sub % p == 0)
            while div.size:
                sub[div] //= p
                exps[div] += 1
                div = div[sub[div] % p == 0]
            pair_count[pos] += 1
            marks.append((p, pos, exps))
    big = np.flatnonzero(res > 1)
    pair_count[big] += 1

    offsets = np.zeros(length + 1, dtype=np.int64)
    np.cumsum(pair_count, out=offsets[1:])
    total = int(offsets[-1])
    arena_p = np.zeros(total, dtype=np.uint64)
    arena_e = np.zeros(total, dtype=np.uint32)
    cursor = offsets[:-1].copy()
    for p, pos, exps in marks:
        slot = cursor[pos]
        arena_p[slot] = p
        arena_e[slot] = exps
        cursor[pos] = slot + 1
    slot = cursor[big]
    arena_p[slot] = res[big]
    arena_e[slot] = 1
    return FactorTable(window, offsets, arena_p, arena_e)


def omega_in_range(entry: FactorEntry, P: int, Q: int) -> int:
    """Number of distinct primes p | n with P <= p <= Q (multiplicity ignored)."""
    if P > Q:
        raise ValueError(f"require P <= Q, got P={P}, Q={Q}")
    return sum(1 for p, _ in entry if P <= p <= Q)


# ---------------------------------------------------------------------------
# Optional binary cache format: magic "SIVW", version u16, start u64,
# len u64, then per offset a varint pair count followed by varint-encoded
# (prime, exponent) pairs.


_MAGIC = b"SIVW"
_VERSION = 1


def _write_varint(buf: io.BytesIO, value: int) -> None:
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            buf.write(bytes((byte | 0x80,)))
        else:
            buf.write(bytes((byte,)))
            return


def _read_varint(view: memoryview, pos: int) -> Tuple[int, int]:
    result = 0
    shift = 0
    while True:
        byte = view[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7


def dump_table(table: FactorTable) -> bytes:
    buf = io.BytesIO()
    buf.write(_MAGIC)
    buf.write(struct.pack("<HQQ", _VERSION, table.window.start, table.window.length))
    offsets = table.offsets
    for i in range(table.size):
        lo, hi = int(offsets[i]), int(offsets[i + 1])
        _write_varint(buf, hi - lo)
        for p, e in zip(table.primes[lo:hi], table.exps[lo:hi]):
            _write_varint(buf, int(p))
            _write_varint(buf, int(e))
    return buf.getvalue()


def load_table(data: bytes) -> FactorTable:
    if data[:4] != _MAGIC:
        raise ValueError("not a factor table dump (bad magic)")
    version, start, length = struct.unpack_from("<HQQ", data, 4)
    if version != _VERSION:
        raise ValueError(f"unsupported dump version {version}")
    view = memoryview(data)
    pos = 4 + struct.calcsize("<HQQ")
    offsets = np.zeros(length + 1, dtype=np.int64)
    primes, exps = [], []
    for i in range(length):
        count, pos = _read_varint(view, pos)
        offsets[i + 1] = offsets[i] + count
        for _ in range(count):
            p, pos = _read_varint(view, pos)
            e, pos = _read_varint(view, pos)
            primes.append(p)
            exps.append(e)
    return FactorTable(
        Window(start, length),
        offsets,
        np.asarray(primes, dtype=np.uint64),
        np.asarray(exps, dtype=np.uint32),
    )

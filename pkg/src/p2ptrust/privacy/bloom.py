"""Bloom filter with double hashing over a BLAKE2b digest."""

from __future__ import annotations

import hashlib
import math


def _as_bytes(item: bytes | str | int) -> bytes:
    if isinstance(item, bytes):
        return item
    if isinstance(item, int):
        return item.to_bytes((item.bit_length() + 8) // 8, "big", signed=True)
    return item.encode()


def expected_fpr(m: int, k: int, n: int) -> float:
    return (1.0 - math.exp(-k * n / m)) ** k


class BloomFilter:
    def __init__(self, m: int = 1024, k: int = 7):
        if m < 1 or k < 1:
            raise ValueError("Bloom filter needs m >= 1 and k >= 1")
        self.m = m
        self.k = k
        self.bits = bytearray((m + 7) // 8)
        self.n_inserted = 0

    def _positions(self, item: bytes | str | int) -> list[int]:
        digest = hashlib.blake2b(_as_bytes(item), digest_size=16).digest()
        h1 = int.from_bytes(digest[:8], "big")
        h2 = int.from_bytes(digest[8:], "big") | 1
        return [(h1 + i * h2) % self.m for i in range(self.k)]

    def add(self, item: bytes | str | int) -> None:
        for pos in self._positions(item):
            self.bits[pos >> 3] |= 1 << (pos & 7)
        self.n_inserted += 1

    def query(self, item: bytes | str | int) -> bool:
        """True means "maybe present"; False is definitive."""
        return all(self.bits[pos >> 3] & (1 << (pos & 7)) for pos in self._positions(item))

    __contains__ = query

    def to_bytes(self) -> bytes:
        return bytes(self.bits)

"""Hirose double-block-length hash over PRINCE.

Chaining value is two 64-bit halves (g, h); each 64-bit message block m is
absorbed with the key ``h || m``::

    g' = E_{h||m}(g) ^ g
    h' = E_{h||m}(g ^ c) ^ g ^ c

Messages get Merkle-Damgard strengthening: a 0x80 byte, zero fill to the
8-byte block size, then the 64-bit big-endian bit length as its own block.
"""

from __future__ import annotations

from typing import Iterable

from .prince import PrinceKey, prince_encrypt

BLOCK_BYTES = 8
IV_G = 0x6A09E667F3BCC908
IV_H = 0xBB67AE8584CAA73B
HIROSE_CONST = 0xFFFFFFFFFFFFFFFF


def pad_message(message: bytes) -> bytes:
    padded = message + b"\x80"
    padded += b"\x00" * (-len(padded) % BLOCK_BYTES)
    return padded + (8 * len(message) % (1 << 64)).to_bytes(8, "big")


def compress(g: int, h: int, m: int, rounds: int = 12) -> tuple[int, int]:
    key = PrinceKey(h, m)
    gc = g ^ HIROSE_CONST
    return prince_encrypt(key, g, rounds) ^ g, prince_encrypt(key, gc, rounds) ^ gc


def _blocks(padded: bytes) -> Iterable[int]:
    for i in range(0, len(padded), BLOCK_BYTES):
        yield int.from_bytes(padded[i : i + BLOCK_BYTES], "big")


def hirose_hash(message: bytes, rounds: int = 12) -> bytes:
    """128-bit digest of ``message``."""
    g, h = IV_G, IV_H
    for m in _blocks(pad_message(message)):
        g, h = compress(g, h, m, rounds)
    return g.to_bytes(8, "big") + h.to_bytes(8, "big")

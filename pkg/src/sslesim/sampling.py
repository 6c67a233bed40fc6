"""Hash-driven deterministic sampling shared by the election mechanisms."""

from __future__ import annotations

import hashlib
from typing import Sequence

from .costs import tally


def digest(*parts: bytes) -> bytes:
    tally("hash")
    return hashlib.sha256(b"".join(parts)).digest()


def u64(x: int) -> bytes:
    return (x % (1 << 64)).to_bytes(8, "big")


def weighted_index(balances: Sequence[int], seed: bytes, max_balance: int | None = None) -> int:
    """Stake-weighted index by rejection sampling on effective balance.

    A uniformly drawn candidate is accepted with probability
    ``balance / max_balance`` (exact up to 2^-64); with uniform balances the
    first candidate always wins.
    """
    n = len(balances)
    top = max(balances) if max_balance is None else max_balance
    i = 0
    while True:
        h = digest(seed, u64(i))
        candidate = int.from_bytes(h[:8], "big") % n
        if int.from_bytes(h[8:16], "big") * top < balances[candidate] << 64:
            return candidate
        i += 1


def sample_distinct(population: int, k: int, seed: bytes) -> list[int]:
    """``k`` distinct indices from ``range(population)``, in draw order.

    Partial Fisher-Yates driven by a hash counter stream.
    """
    if not 0 <= k <= population:
        raise ValueError(f"cannot draw {k} distinct items from {population}")
    pool = list(range(population))
    for i in range(k):
        h = digest(seed, u64(i))
        j = i + int.from_bytes(h[:8], "big") % (population - i)
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:k]

"""Prime-order group backends, written additively.

``Secp256k1`` is the production backend (libsecp256k1 through coincurve).
``TinyGroup`` is a Schnorr subgroup of Z_p^* small enough that discrete logs
can be brute-forced in tests.
"""

from __future__ import annotations

import hashlib
import random
from abc import ABC, abstractmethod
from typing import Any

from coincurve import PublicKey

from ..costs import tally

Element = Any


class GroupBackend(ABC):
    name: str
    order: int
    element_size: int

    @property
    @abstractmethod
    def generator(self) -> Element: ...

    @abstractmethod
    def _mul(self, k: int, p: Element) -> Element: ...

    @abstractmethod
    def _add(self, p: Element, q: Element) -> Element: ...

    @abstractmethod
    def serialize(self, p: Element) -> bytes: ...

    @abstractmethod
    def deserialize(self, raw: bytes) -> Element:
        """Parse an element; raises ValueError on anything malformed."""

    @property
    def scalar_size(self) -> int:
        return (self.order.bit_length() + 7) // 8

    def mul(self, k: int, p: Element) -> Element:
        k %= self.order
        if k == 0:
            raise ValueError("scalar is zero mod the group order")
        tally("scalar-mul")
        return self._mul(k, p)

    def base_mul(self, k: int) -> Element:
        return self.mul(k, self.generator)

    def add(self, p: Element, q: Element) -> Element:
        tally("point-add")
        return self._add(p, q)

    def eq(self, p: Element, q: Element) -> bool:
        return self.serialize(p) == self.serialize(q)

    def random_scalar(self, rng: random.Random) -> int:
        return rng.randrange(1, self.order)

    def hash_to_scalar(self, *parts: bytes) -> int:
        h = hashlib.sha256()
        for part in parts:
            h.update(len(part).to_bytes(4, "big"))
            h.update(part)
        tally("hash")
        return int.from_bytes(h.digest(), "big") % self.order

    def scalar_bytes(self, k: int) -> bytes:
        return (k % self.order).to_bytes(self.scalar_size, "big")

    def __repr__(self) -> str:
        return f"<{self.name} group>"


class Secp256k1(GroupBackend):
    name = "secp256k1"
    order = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
    element_size = 33

    def __init__(self) -> None:
        self._g = PublicKey.from_valid_secret((1).to_bytes(32, "big"))

    @property
    def generator(self) -> PublicKey:
        return self._g

    def _mul(self, k: int, p: PublicKey) -> PublicKey:
        return p.multiply(k.to_bytes(32, "big"))

    def _add(self, p: PublicKey, q: PublicKey) -> PublicKey:
        try:
            return PublicKey.combine_keys([p, q])
        except Exception as exc:  # sum is the point at infinity
            raise ValueError("group sum is the identity") from exc

    def serialize(self, p: PublicKey) -> bytes:
        return p.format(compressed=True)

    def deserialize(self, raw: bytes) -> PublicKey:
        if len(raw) != self.element_size:
            raise ValueError("bad element length")
        try:
            return PublicKey(bytes(raw))
        except Exception as exc:
            raise ValueError("not a curve point") from exc


class TinyGroup(GroupBackend):
    """Order-``q`` subgroup of Z_p^*; needs q prime, q | p - 1, q < 2^16."""

    def __init__(self, p: int = 607, q: int = 101) -> None:
        if q >= 1 << 16 or (p - 1) % q or not _is_prime(p) or not _is_prime(q):
            raise ValueError(f"invalid tiny group parameters p={p}, q={q}")
        self.p = p
        self.order = q
        self.name = f"tiny-{p}-{q}"
        self.element_size = (p.bit_length() + 7) // 8
        h = 2
        while pow(h, (p - 1) // q, p) == 1:
            h += 1
        self._g = pow(h, (p - 1) // q, p)

    @property
    def generator(self) -> int:
        return self._g

    def _mul(self, k: int, p: int) -> int:
        return pow(p, k, self.p)

    def _add(self, p: int, q: int) -> int:
        return p * q % self.p

    def serialize(self, p: int) -> bytes:
        return p.to_bytes(self.element_size, "big")

    def deserialize(self, raw: bytes) -> int:
        if len(raw) != self.element_size:
            raise ValueError("bad element length")
        x = int.from_bytes(raw, "big")
        if not 1 <= x < self.p or pow(x, self.order, self.p) != 1:
            raise ValueError("not a subgroup element")
        return x

    def discrete_log(self, p: int, base: int | None = None) -> int:
        """Brute-force k with k*base = p (test oracle)."""
        base = self._g if base is None else base
        acc = 1
        for k in range(self.order):
            if acc == p:
                return k
            acc = acc * base % self.p
        raise ValueError("element not in the subgroup generated by base")


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


SECP256K1 = Secp256k1()

_BACKENDS = {"secp256k1": lambda: SECP256K1, "tiny": TinyGroup}


def get_group(name: str) -> GroupBackend:
    try:
        return _BACKENDS[name]()
    except KeyError:
        raise ValueError(f"unknown group backend {name!r}") from None

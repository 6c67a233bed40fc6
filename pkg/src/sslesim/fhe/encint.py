"""Encrypted unsigned integers, plaintext-with-cost-accounting backend.

An :class:`EncInt` keeps its value inside an opaque handle; only the
:class:`FheContext` that produced it can decrypt.  Every homomorphic op
tallies its kind on the active cost meter, so circuits written against this
module report the same op counts a real FHE backend would execute.
"""

from __future__ import annotations

import itertools
from typing import Sequence, Union

from ..costs import tally

DEFAULT_WIDTH = 64
BACKEND = "plaintext-cost"

_context_ids = itertools.count(1)


class FheError(ValueError):
    pass


class EncInt:
    __slots__ = ("_v", "width", "_ctx")

    def __init__(self, value: int, width: int, ctx: int) -> None:
        self._v = value
        self.width = width
        self._ctx = ctx

    @property
    def backend(self) -> str:
        return BACKEND

    def __repr__(self) -> str:
        return f"<EncInt w={self.width} ctx={self._ctx}>"

    def __reduce__(self):
        raise TypeError("EncInt handles cannot be serialized")


Operand = Union[EncInt, int]


class FheContext:
    """Key holder and sole decryption authority for its ciphertexts.

    Stands in for the threshold committee; there is exactly one party.
    """

    def __init__(self, width: int = DEFAULT_WIDTH) -> None:
        if width < 1:
            raise FheError("width must be positive")
        self.width = width
        self.id = next(_context_ids)

    def enc(self, x: int, width: int | None = None) -> EncInt:
        width = self.width if width is None else width
        if not 0 <= x < (1 << width):
            raise FheError(f"plaintext {x} out of range for width {width}")
        return EncInt(x, width, self.id)

    def dec(self, c: EncInt) -> int:
        if not isinstance(c, EncInt) or c._ctx != self.id:
            raise FheError("ciphertext does not belong to this context")
        return c._v


def _mask(width: int) -> int:
    return (1 << width) - 1


def _pair(a: Operand, b: Operand) -> tuple[int, int, int, int]:
    """Unpack operands; public ints are treated as trivial encryptions."""
    if isinstance(a, EncInt) and isinstance(b, EncInt):
        if a.width != b.width:
            raise FheError(f"width mismatch: {a.width} vs {b.width}")
        if a._ctx != b._ctx:
            raise FheError("operands from different contexts")
        return a._v, b._v, a.width, a._ctx
    if isinstance(a, EncInt):
        if not 0 <= b < (1 << a.width):
            raise FheError("public operand out of range")
        return a._v, b, a.width, a._ctx
    if isinstance(b, EncInt):
        if not 0 <= a < (1 << b.width):
            raise FheError("public operand out of range")
        return a, b._v, b.width, b._ctx
    raise FheError("at least one operand must be encrypted")


def h_add(a: Operand, b: Operand) -> EncInt:
    x, y, w, ctx = _pair(a, b)
    tally("add")
    return EncInt((x + y) & _mask(w), w, ctx)


def h_sub(a: Operand, b: Operand) -> EncInt:
    x, y, w, ctx = _pair(a, b)
    tally("sub")
    return EncInt((x - y) & _mask(w), w, ctx)


def h_cmp_lt(a: Operand, b: Operand) -> EncInt:
    """Encrypted single bit ``[a < b]``."""
    x, y, _, ctx = _pair(a, b)
    tally("cmp")
    return EncInt(int(x < y), 1, ctx)


def h_select(bit: EncInt, a: Operand, b: Operand) -> EncInt:
    """``a`` if the encrypted bit is 1, else ``b``."""
    if not isinstance(bit, EncInt) or bit.width != 1:
        raise FheError("selector must be an encrypted bit")
    x, y, w, ctx = _pair(a, b)
    if ctx != bit._ctx:
        raise FheError("selector from a different context")
    tally("select")
    return EncInt(x if bit._v else y, w, ctx)


def h_xor(a: Operand, b: Operand) -> EncInt:
    x, y, w, ctx = _pair(a, b)
    tally("xor")
    return EncInt(x ^ y, w, ctx)


def h_and(a: Operand, b: Operand) -> EncInt:
    x, y, w, ctx = _pair(a, b)
    tally("and")
    return EncInt(x & y, w, ctx)


def h_or(a: Operand, b: Operand) -> EncInt:
    x, y, w, ctx = _pair(a, b)
    tally("and")
    return EncInt(x | y, w, ctx)


def h_not(a: EncInt) -> EncInt:
    tally("xor")
    return EncInt(a._v ^ _mask(a.width), a.width, a._ctx)


def h_shl(a: EncInt, n: int) -> EncInt:
    tally("rotate")
    return EncInt((a._v << n) & _mask(a.width), a.width, a._ctx)


def h_shr(a: EncInt, n: int) -> EncInt:
    tally("rotate")
    return EncInt(a._v >> n, a.width, a._ctx)


def h_rotl(a: EncInt, n: int) -> EncInt:
    tally("rotate")
    w = a.width
    n %= w
    return EncInt(((a._v << n) | (a._v >> (w - n))) & _mask(w), w, a._ctx)


def h_lut(a: EncInt, table: Sequence[int]) -> EncInt:
    """Apply a 4-bit lookup table to every nibble (one lookup per nibble)."""
    if a.width % 4 or len(table) != 16:
        raise FheError("nibble lookups need a width divisible by 4 and a 16-entry table")
    tally("table-lookup", a.width // 4)
    out = 0
    for i in range(0, a.width, 4):
        out |= table[(a._v >> i) & 0xF] << i
    return EncInt(out, a.width, a._ctx)

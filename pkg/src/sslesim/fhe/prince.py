"""PRINCE 64-bit block cipher (128-bit key).

Nibble 0 is the most significant nibble of the block.  ``rounds`` counts
the full cipher as 12; smaller even values drop symmetric round pairs from
both halves, which keeps the alpha-reflection property intact.
"""

from __future__ import annotations

from dataclasses import dataclass

MASK64 = (1 << 64) - 1
ALPHA = 0xC0AC29B7C97C50DD

SBOX = (0xB, 0xF, 0x3, 0x2, 0xA, 0xC, 0x9, 0x1, 0x6, 0x7, 0x8, 0x0, 0xE, 0x5, 0xD, 0x4)
SBOX_INV = tuple(SBOX.index(i) for i in range(16))

RC = (
    0x0000000000000000,
    0x13198A2E03707344,
    0xA4093822299F31D0,
    0x082EFA98EC4E6C89,
    0x452821E638D01377,
    0xBE5466CF34E90C6C,
    0x7EF84F78FD955CB1,
    0x85840851F1AC43AA,
    0xC882D32F25323C54,
    0x64A51195E0E3610D,
    0xD3B5A399CA0C2399,
    0xC0AC29B7C97C50DD,
)

# ShiftRows: output nibble i takes input nibble SHIFT_ROWS[i].
SHIFT_ROWS = (0, 5, 10, 15, 4, 9, 14, 3, 8, 13, 2, 7, 12, 1, 6, 11)
SHIFT_ROWS_INV = tuple(SHIFT_ROWS.index(i) for i in range(16))


def _m_hat_columns(shift: int) -> list[int]:
    """Column masks of the 16x16 involution M-hat; bit 15 is the chunk MSB.

    Block (row, col) is the 4x4 identity with diagonal entry
    ``(row + col + shift) % 4`` zeroed.
    """
    cols = [0] * 16
    for bc in range(4):
        for c in range(4):
            col = 0
            for br in range(4):
                if c != (br + bc + shift) % 4:
                    col |= 1 << (15 - (4 * br + c))
            cols[4 * bc + c] = col
    return cols


def _byte_tables(cols: list[int]) -> tuple[list[int], list[int]]:
    hi = [0] * 256
    lo = [0] * 256
    for b in range(256):
        for i in range(8):
            if b >> (7 - i) & 1:
                hi[b] ^= cols[i]
                lo[b] ^= cols[8 + i]
    return hi, lo


_M0 = _byte_tables(_m_hat_columns(0))
_M1 = _byte_tables(_m_hat_columns(1))
_CHUNK_TABLES = (_M0, _M1, _M1, _M0)  # most significant chunk first


def m_prime(x: int) -> int:
    out = 0
    for i, (hi, lo) in enumerate(_CHUNK_TABLES):
        shift = 48 - 16 * i
        chunk = (x >> shift) & 0xFFFF
        out |= (hi[chunk >> 8] ^ lo[chunk & 0xFF]) << shift
    return out


def _permute_nibbles(x: int, perm: tuple[int, ...]) -> int:
    out = 0
    for i, src in enumerate(perm):
        out |= ((x >> (60 - 4 * src)) & 0xF) << (60 - 4 * i)
    return out


def shift_rows(x: int) -> int:
    return _permute_nibbles(x, SHIFT_ROWS)


def shift_rows_inv(x: int) -> int:
    return _permute_nibbles(x, SHIFT_ROWS_INV)


def sub_nibbles(x: int, table: tuple[int, ...] = SBOX) -> int:
    out = 0
    for i in range(0, 64, 4):
        out |= table[(x >> i) & 0xF] << i
    return out


def derive_k0_prime(k0: int) -> int:
    return (((k0 >> 1) | (k0 << 63)) & MASK64) ^ (k0 >> 63)


def _half_rounds(rounds: int) -> int:
    if rounds % 2 or not 2 <= rounds <= 12:
        raise ValueError(f"rounds must be even and in [2, 12], got {rounds}")
    return (rounds - 2) // 2


@dataclass(frozen=True)
class PrinceKey:
    k0: int
    k1: int

    def __post_init__(self) -> None:
        if not (0 <= self.k0 <= MASK64 and 0 <= self.k1 <= MASK64):
            raise ValueError("key words must be 64-bit")

    @property
    def k0_prime(self) -> int:
        return derive_k0_prime(self.k0)

    @classmethod
    def from_bytes(cls, raw: bytes) -> PrinceKey:
        if len(raw) != 16:
            raise ValueError("PRINCE keys are 16 bytes")
        return cls(int.from_bytes(raw[:8], "big"), int.from_bytes(raw[8:], "big"))

    def to_bytes(self) -> bytes:
        return self.k0.to_bytes(8, "big") + self.k1.to_bytes(8, "big")


def prince_core(x: int, k1: int, rounds: int = 12) -> int:
    half = _half_rounds(rounds)
    x ^= k1 ^ RC[0]
    for i in range(1, half + 1):
        x = shift_rows(m_prime(sub_nibbles(x)))
        x ^= RC[i] ^ k1
    x = sub_nibbles(m_prime(sub_nibbles(x)), SBOX_INV)
    for i in range(11 - half, 11):
        x ^= RC[i] ^ k1
        x = sub_nibbles(m_prime(shift_rows_inv(x)), SBOX_INV)
    return x ^ RC[11] ^ k1


def encrypt_whitened(x: int, k_in: int, k_out: int, k1: int, rounds: int = 12) -> int:
    """PRINCE with explicit pre/post whitening words."""
    return prince_core(x ^ k_in, k1, rounds) ^ k_out


def prince_encrypt(key: PrinceKey, block: int, rounds: int = 12) -> int:
    if not 0 <= block <= MASK64:
        raise ValueError("block must be a 64-bit word")
    return encrypt_whitened(block, key.k0, key.k0_prime, key.k1, rounds)


def prince_decrypt(key: PrinceKey, block: int, rounds: int = 12) -> int:
    """Inverse of :func:`prince_encrypt`, undoing each step in reverse."""
    if not 0 <= block <= MASK64:
        raise ValueError("block must be a 64-bit word")
    half = _half_rounds(rounds)
    k1 = key.k1
    x = block ^ key.k0_prime
    x ^= RC[11] ^ k1
    for i in reversed(range(11 - half, 11)):
        x = shift_rows(m_prime(sub_nibbles(x)))
        x ^= RC[i] ^ k1
    x = sub_nibbles(m_prime(sub_nibbles(x)), SBOX_INV)
    for i in reversed(range(1, half + 1)):
        x ^= RC[i] ^ k1
        x = sub_nibbles(m_prime(shift_rows_inv(x)), SBOX_INV)
    x ^= k1 ^ RC[0]
    return x ^ key.k0

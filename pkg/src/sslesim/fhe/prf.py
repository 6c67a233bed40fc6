"""Voucher PRF: PRINCE keyed by a Hirose digest of the public seed.

``prf(ticket, seed) = PRINCE_{hirose(seed)}(ticket)``.  The encrypted
variant evaluates PRINCE as a word-level circuit of xors, masks, shifts and
nibble lookups so that only the ticket is ever under encryption.
"""

from __future__ import annotations

from functools import lru_cache

from .encint import EncInt, h_and, h_lut, h_or, h_shl, h_shr, h_xor
from .hirose import hirose_hash
from .prince import (
    MASK64,
    RC,
    SBOX,
    SBOX_INV,
    SHIFT_ROWS,
    SHIFT_ROWS_INV,
    PrinceKey,
    _half_rounds,
    prince_encrypt,
)


@lru_cache(maxsize=4096)
def prf_key(seed: int) -> PrinceKey:
    if not 0 <= seed <= MASK64:
        raise ValueError("seed must be a 64-bit word")
    return PrinceKey.from_bytes(hirose_hash(seed.to_bytes(8, "big")))


def prf_plain(ticket: int, seed: int, rounds: int = 12) -> int:
    return prince_encrypt(prf_key(seed), ticket, rounds)


def _repeat16(pattern: int) -> int:
    return pattern * 0x0001000100010001


def _m_prime_masks() -> list[int]:
    """Per-offset masks for the M' layer.

    Within each 16-bit chunk, output nibble row ``br`` XORs input nibble
    ``(br + d) % 4`` for d = 0..3, with the nibble bit ``(2*br + d + s) % 4``
    cleared (bit 0 = nibble MSB); s is 0 for the outer chunks, 1 for the
    inner two.
    """
    masks = []
    for d in range(4):
        mask = 0
        for chunk, s in enumerate((0, 1, 1, 0)):
            for br in range(4):
                nib = 0xF & ~(8 >> ((2 * br + d + s) % 4))
                mask |= nib << (60 - 16 * chunk - 4 * br)
        masks.append(mask)
    return masks


_MP_MASKS = _m_prime_masks()


def _rotl_chunks(x: EncInt, nibbles: int) -> EncInt:
    bits = 4 * nibbles
    hi = h_and(h_shl(x, bits), _repeat16((0xFFFF << bits) & 0xFFFF))
    lo = h_and(h_shr(x, 16 - bits), _repeat16((1 << bits) - 1))
    return h_or(hi, lo)


def _enc_m_prime(x: EncInt) -> EncInt:
    acc = h_and(x, _MP_MASKS[0])
    for d in range(1, 4):
        acc = h_xor(acc, h_and(_rotl_chunks(x, d), _MP_MASKS[d]))
    return acc


def _shift_groups(perm: tuple[int, ...]) -> list[tuple[int, int]]:
    """Group a nibble permutation into (left-shift bits, mask) pairs."""
    groups: dict[int, int] = {}
    for i, src in enumerate(perm):
        shift = 4 * (src - i)
        groups[shift] = groups.get(shift, 0) | (0xF << (60 - 4 * i))
    return sorted(groups.items())


_SR_GROUPS = _shift_groups(SHIFT_ROWS)
_SR_INV_GROUPS = _shift_groups(SHIFT_ROWS_INV)


def _enc_permute(x: EncInt, groups: list[tuple[int, int]]) -> EncInt:
    acc = None
    for shift, mask in groups:
        if shift > 0:
            moved = h_shl(x, shift)
        elif shift < 0:
            moved = h_shr(x, -shift)
        else:
            moved = x
        part = h_and(moved, mask)
        acc = part if acc is None else h_or(acc, part)
    return acc


def prince_encrypt_enc(key: PrinceKey, block: EncInt, rounds: int = 12) -> EncInt:
    """PRINCE over an encrypted 64-bit block with a public key."""
    if block.width != 64:
        raise ValueError("PRINCE circuit needs a 64-bit ciphertext")
    half = _half_rounds(rounds)
    k1 = key.k1
    x = h_xor(block, key.k0 ^ k1 ^ RC[0])
    for i in range(1, half + 1):
        x = _enc_permute(_enc_m_prime(h_lut(x, SBOX)), _SR_GROUPS)
        x = h_xor(x, RC[i] ^ k1)
    x = h_lut(_enc_m_prime(h_lut(x, SBOX)), SBOX_INV)
    for i in range(11 - half, 11):
        x = h_xor(x, RC[i] ^ k1)
        x = h_lut(_enc_m_prime(_enc_permute(x, _SR_INV_GROUPS)), SBOX_INV)
    return h_xor(x, RC[11] ^ k1 ^ key.k0_prime)


def prf_enc(ticket: EncInt, seed: int, rounds: int = 12) -> EncInt:
    return prince_encrypt_enc(prf_key(seed), ticket, rounds)

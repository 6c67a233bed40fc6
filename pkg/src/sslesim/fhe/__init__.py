"""Plaintext-cost homomorphic integers and the PRINCE-based voucher PRF."""

from .encint import EncInt, FheContext, FheError
from .hirose import hirose_hash
from .prf import prf_enc, prf_plain
from .prince import PrinceKey, prince_decrypt, prince_encrypt

__all__ = [
    "EncInt",
    "FheContext",
    "FheError",
    "PrinceKey",
    "hirose_hash",
    "prf_enc",
    "prf_plain",
    "prince_decrypt",
    "prince_encrypt",
]

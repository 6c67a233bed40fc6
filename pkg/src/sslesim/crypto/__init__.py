"""Prime-order group backends, Whisk trackers and their proofs."""

from .group import SECP256K1, GroupBackend, Secp256k1, TinyGroup, get_group
from .trackers import (
    OwnershipProof,
    ShuffleTranscript,
    Tracker,
    make_tracker,
    prove_ownership,
    rerandomize,
    shuffle,
    verify_ownership,
    verify_shuffle,
)

__all__ = [
    "SECP256K1",
    "GroupBackend",
    "OwnershipProof",
    "Secp256k1",
    "ShuffleTranscript",
    "TinyGroup",
    "Tracker",
    "get_group",
    "make_tracker",
    "prove_ownership",
    "rerandomize",
    "shuffle",
    "verify_ownership",
    "verify_shuffle",
]

"""Whisk trackers, ownership proofs and shuffle transcripts.

A tracker ``(rG, krG)`` commits to a long-term secret ``k``.  Multiplying
both halves by a fresh ``z`` re-randomizes it without changing ``k``.

Ownership is a Fiat-Shamir discrete-log-equality proof: the prover shows
the same ``k`` links ``rG -> krG`` and ``G -> kG``, where ``kG`` is the
validator's registered commitment.

Shuffles are checked by transcript audit: the shuffler discloses the
permutation and randomizers to verifiers, who recompute every output.
Transcripts never leave the verifier side.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .group import SECP256K1, Element, GroupBackend


@dataclass(frozen=True, eq=False)
class Tracker:
    r_point: Element
    kr_point: Element
    group: GroupBackend = field(default=SECP256K1, repr=False)

    def to_bytes(self) -> bytes:
        return self.group.serialize(self.r_point) + self.group.serialize(self.kr_point)

    @classmethod
    def from_bytes(cls, raw: bytes, group: GroupBackend = SECP256K1) -> Tracker:
        n = group.element_size
        if len(raw) != 2 * n:
            raise ValueError("bad tracker length")
        return cls(group.deserialize(raw[:n]), group.deserialize(raw[n:]), group)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Tracker) and self.to_bytes() == other.to_bytes()

    def __hash__(self) -> int:
        return hash(self.to_bytes())


def make_tracker(k: int, r: int, group: GroupBackend = SECP256K1) -> Tracker:
    if k % group.order == 0 or r % group.order == 0:
        raise ValueError("tracker scalars must be nonzero")
    r_point = group.base_mul(r)
    return Tracker(r_point, group.mul(k, r_point), group)


def rerandomize(t: Tracker, z: int) -> Tracker:
    g = t.group
    if z % g.order == 0:
        raise ValueError("re-randomization scalar must be nonzero")
    return Tracker(g.mul(z, t.r_point), g.mul(z, t.kr_point), g)


def owns(t: Tracker, k: int) -> bool:
    """The private check a validator runs against a slot tracker."""
    g = t.group
    return k % g.order != 0 and g.eq(g.mul(k, t.r_point), t.kr_point)


@dataclass(frozen=True)
class OwnershipProof:
    commit_r: Element  # w * rG
    commit_g: Element  # w * G
    k_commitment: Element  # k * G
    response: int
    group: GroupBackend = field(default=SECP256K1, repr=False, compare=False)

    def to_bytes(self) -> bytes:
        g = self.group
        return (
            g.serialize(self.commit_r)
            + g.serialize(self.commit_g)
            + g.serialize(self.k_commitment)
            + g.scalar_bytes(self.response)
        )

    @classmethod
    def from_bytes(cls, raw: bytes, group: GroupBackend = SECP256K1) -> OwnershipProof:
        n = group.element_size
        if len(raw) != 3 * n + group.scalar_size:
            raise ValueError("bad proof length")
        s = int.from_bytes(raw[3 * n :], "big")
        if s >= group.order:
            raise ValueError("response out of range")
        return cls(
            group.deserialize(raw[:n]),
            group.deserialize(raw[n : 2 * n]),
            group.deserialize(raw[2 * n : 3 * n]),
            s,
            group,
        )


def _challenge(t: Tracker, k_commitment: Element, commit_r: Element, commit_g: Element, context: bytes) -> int:
    g = t.group
    # Nonzero challenge: c = 0 would accept any response.
    return 1 + g.hash_to_scalar(
        b"whisk-ownership",
        context,
        t.to_bytes(),
        g.serialize(k_commitment),
        g.serialize(commit_r),
        g.serialize(commit_g),
    ) % (g.order - 1)


def prove_ownership(
    t: Tracker, k: int, context: bytes, rng: random.Random | None = None
) -> OwnershipProof:
    g = t.group
    rng = rng or random.Random(g.hash_to_scalar(b"nonce", context, t.to_bytes(), g.scalar_bytes(k)))
    k_commitment = g.base_mul(k)
    while True:  # a zero response is rejected by verifiers; redraw the nonce
        w = g.random_scalar(rng)
        commit_r = g.mul(w, t.r_point)
        commit_g = g.base_mul(w)
        c = _challenge(t, k_commitment, commit_r, commit_g, context)
        s = (w + c * k) % g.order
        if s:
            return OwnershipProof(commit_r, commit_g, k_commitment, s, g)


def _combine(g: GroupBackend, a: Element, c: int, b: Element) -> Element:
    # a + c*b, with c = 0 allowed
    if c % g.order == 0:
        return a
    return g.add(a, g.mul(c, b))


def verify_ownership(t: Tracker, proof: OwnershipProof | bytes, context: bytes) -> bool:
    g = t.group
    try:
        if isinstance(proof, (bytes, bytearray)):
            proof = OwnershipProof.from_bytes(bytes(proof), g)
        if proof.response % g.order == 0:
            return False
        c = _challenge(t, proof.k_commitment, proof.commit_r, proof.commit_g, context)
        lhs_r = g.mul(proof.response, t.r_point)
        lhs_g = g.base_mul(proof.response)
        return g.eq(lhs_r, _combine(g, proof.commit_r, c, t.kr_point)) and g.eq(
            lhs_g, _combine(g, proof.commit_g, c, proof.k_commitment)
        )
    except (ValueError, TypeError, AttributeError):
        return False


@dataclass(frozen=True)
class ShuffleTranscript:
    inputs: tuple[Tracker, ...]
    outputs: tuple[Tracker, ...]
    permutation: tuple[int, ...]
    randomizers: tuple[int, ...]


def shuffle(trackers: Sequence[Tracker], rng: random.Random) -> tuple[list[Tracker], ShuffleTranscript]:
    """Permute and re-randomize; ``out[i] = rerandomize(in[perm[i]], z[perm[i]])``."""
    if not trackers:
        raise ValueError("cannot shuffle an empty list")
    g = trackers[0].group
    m = len(trackers)
    perm = list(range(m))
    rng.shuffle(perm)
    zs = [g.random_scalar(rng) for _ in range(m)]
    outputs = [rerandomize(trackers[perm[i]], zs[perm[i]]) for i in range(m)]
    return outputs, ShuffleTranscript(tuple(trackers), tuple(outputs), tuple(perm), tuple(zs))


def verify_shuffle(
    inputs: Sequence[Tracker], outputs: Sequence[Tracker], transcript: ShuffleTranscript
) -> bool:
    m = len(inputs)
    perm, zs = transcript.permutation, transcript.randomizers
    if len(outputs) != m or len(perm) != m or len(zs) != m or m == 0:
        return False
    if sorted(perm) != list(range(m)):
        return False
    if tuple(inputs) != transcript.inputs or tuple(outputs) != transcript.outputs:
        return False
    try:
        return all(outputs[i] == rerandomize(inputs[perm[i]], zs[perm[i]]) for i in range(m))
    except (ValueError, TypeError, IndexError):
        return False
